/*@ requires Side1 > 0 && Side2 > 0 && Side3 > 0;
  @ ensures \result >= 1 && \result <= 4;
  @ assigns \nothing;*/
int testme (int Side1, int Side2, int Side3){
   int triOut;
   /*@ assert Side1 <= 2147483647 && Side2 <= 2147483647 && Side3 <= 2147483647; */
   if (Side1 <= 0 || Side2 <= 0 || Side3 <= 0)
   {
      triOut = 4;
      return (triOut);
   }
   triOut = 0;
   if (Side1 == Side2){ triOut = triOut + 1;}
   if (Side1 == Side3){ triOut = triOut + 2;}
   if (Side2 == Side3){triOut = triOut + 3;}
   if (triOut == 0)
   {
     /*@ assert Side1+Side2 <= 2147483647 && Side1+Side3 <= 2147483647 && Side2+Side3 <= 2147483647; */

     if (Side1+Side2 <= Side3 || Side2+Side3 <= Side1 || Side1+Side3 <= Side2){triOut = 4;}
     else{triOut = 1;}
     return (triOut);
   }
   if (triOut > 3){triOut = 3;}
   else{
     /*@ assert Side1+Side2 <= 2147483647 && Side1+Side3 <= 2147483647 && Side2+Side3 <= 2147483647; */
     if (triOut == 1 && Side1+Side2 > Side3){triOut = 2;}
     else{
       if (triOut == 2 && Side1+Side3 > Side2){triOut = 2;}
       else{
         pathcrawler_label(triOut == 3);
         pathcrawler_label(triOut != 3);
         pathcrawler_label(Side2+Side3 > Side1);
         pathcrawler_label(Side2+Side3 <= Side1);
         if (triOut == 3 && Side2+Side3 > Side1){triOut = 2;}
         else{triOut = 4;}
       }
     }
   }
   return (triOut);
}

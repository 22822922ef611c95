/*@
  @ requires \valid(A + (0..9)) && \valid(&elem);
  @ ensures \result == 0 || \result == 1;
  @ assigns \nothing;
*/
int testme( int A[10], int elem) {
  int low, high, mid, ret ;
  low = 0 ;
  high = 9 ;
  ret = 0 ;
  /*@
    @ loop invariant high >= low;
    @ loop assigns low, high, mid, ret;
    @ loop variant high - low;
  */
  while( ( high > low ) )
    { mid = (low + high) / 2 ;

      if( elem == A[mid] )
         ret = 1;
      if( elem > A[mid] )
        low = mid + 1 ;
      else
        high = mid - 1;
    }
  mid = (low + high) / 2 ;

  if( ( ret != 1)  && ( elem == A[mid]) )
    ret = 1;

  return ret ;
}

/*@ 
  requires -1073741824 <= x <= 1073741823; // Prevent x*2 overflow
  requires -2147483648 <= (x*2 - y) <= 2147483647; // Prevent v-y overflow
  requires \valid(tab + (0..2));            // Ensure tab[2] is accessible
  requires \valid(tab + (y +4));            // Ensure tab[y+4] access is valid
  requires \valid(tab + (2 + (x*2 - y)));   // Ensure *(pt+v) write is valid
*/
int testme(int x, int y, int tab[]) {
  int v;
  int *pt;
  int **ppt;
  v = x * 2;
  v = v - y;        /* v = (x * 2) - y */
  pt = &tab[2];
  tab[2] = x;
  ppt = &pt;
  pt = pt + 1;      /* pt = &tab[2] + 1 */
  *ppt = &tab[2];   /* pt = &tab[2] */
  *(pt + v) = y;    /* tab[2 + (x * 2) - y] = y */
  if (tab[y + 4] > 5)
    return 1;
  return 0;
}

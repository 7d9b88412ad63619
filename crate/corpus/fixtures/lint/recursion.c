/* A recursive helper. */
static int32_t fact(int32_t n)
{
    if (n <= 1) return 1;
    return n * fact(n - 1);
}

/* A loop without a static bound. */
static int32_t count_down(int32_t n)
{
    int32_t k = 0;
    while (n > 0) {
        n = n - 1;
        k = k + 1;
    }
    return k;
}

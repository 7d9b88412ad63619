/* A for loop bounded by a runtime value. */
static int32_t sum_to(int32_t n)
{
    int32_t i;
    int32_t s = 0;
    for (i = 0; i < n; i++) {
        s = s + i;
    }
    return s;
}

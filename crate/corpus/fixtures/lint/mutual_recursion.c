/* Two helpers calling each other. */
static int32_t is_odd(int32_t n);

static int32_t is_even(int32_t n)
{
    if (n == 0) return 1;
    return is_odd(n - 1);
}

static int32_t is_odd(int32_t n)
{
    if (n == 0) return 0;
    return is_even(n - 1);
}

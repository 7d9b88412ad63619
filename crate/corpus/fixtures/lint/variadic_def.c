/* A variadic definition. */
static int32_t first_of(int32_t n, ...)
{
    return n;
}

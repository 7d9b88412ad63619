/* Formatted output through a variadic function. */
static void trace_value(int32_t v)
{
    printf("%d\n", v);
}

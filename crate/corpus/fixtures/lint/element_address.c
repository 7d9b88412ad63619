/* Taking the address of an array element. */
static void pick(int32_t xs[4], int32_t **out)
{
    *out = &xs[2];
}

/* Heap allocation. */
static int32_t scratch(void)
{
    int32_t *p = (int32_t *)malloc(sizeof(int32_t) * 4);
    return p[0];
}

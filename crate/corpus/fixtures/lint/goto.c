/* Unstructured control flow. */
static int32_t jump(int32_t n)
{
    if (n > 0) goto done;
    n = 1;
done:
    return n;
}

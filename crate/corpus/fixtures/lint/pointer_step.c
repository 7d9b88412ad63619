/* Walking an array through pointer increments. */
static int32_t second(const int32_t *xs)
{
    xs++;
    return xs[0];
}

/* Reading through a computed address. */
static int32_t third(const int32_t *xs, int32_t k)
{
    return *(xs + k);
}

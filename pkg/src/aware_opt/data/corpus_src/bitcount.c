int popcount_loop(unsigned x) {
    int c = 0;
    while (x) {
        c += x & 1u;
        x >>= 1;
    }
    return c;
}

int popcount_kernighan(unsigned x) {
    int c = 0;
    for (; x; c++)
        x &= x - 1;
    return c;
}

int parity(unsigned long long x) {
    x ^= x >> 32;
    x ^= x >> 16;
    x ^= x >> 8;
    x ^= x >> 4;
    x &= 0xf;
    return (0x6996 >> x) & 1;
}

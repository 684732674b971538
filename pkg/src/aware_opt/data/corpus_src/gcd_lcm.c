static unsigned gcd(unsigned a, unsigned b) {
    while (b != 0) {
        unsigned t = a % b;
        a = b;
        b = t;
    }
    return a;
}

unsigned lcm(unsigned a, unsigned b) {
    if (a == 0 || b == 0)
        return 0;
    return a / gcd(a, b) * b;
}

unsigned lcm_range(unsigned n) {
    unsigned acc = 1;
    for (unsigned i = 2; i <= n; i++)
        acc = lcm(acc, i);
    return acc;
}

int sieve(char *is_composite, int n) {
    int count = 0;
    for (int i = 0; i <= n; i++)
        is_composite[i] = 0;
    for (int i = 2; i <= n; i++) {
        if (is_composite[i])
            continue;
        count++;
        for (long j = (long)i * i; j <= n; j += i)
            is_composite[j] = 1;
    }
    return count;
}

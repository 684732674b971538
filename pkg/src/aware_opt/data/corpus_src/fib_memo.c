static long memo[92];

long fib(int n) {
    if (n < 2)
        return n;
    if (memo[n])
        return memo[n];
    long r = fib(n - 1) + fib(n - 2);
    memo[n] = r;
    return r;
}

long fib_sum(int n) {
    long total = 0;
    for (int i = 0; i < n; i++)
        total += fib(i);
    return total;
}

int str_len(const char *s) {
    int n = 0;
    while (s[n])
        n++;
    return n;
}

void str_rev(char *s) {
    int n = str_len(s);
    for (int i = 0, j = n - 1; i < j; i++, j--) {
        char t = s[i];
        s[i] = s[j];
        s[j] = t;
    }
}

int count_char(const char *s, char c) {
    int k = 0;
    for (int i = 0; s[i]; i++)
        if (s[i] == c)
            k++;
    return k;
}

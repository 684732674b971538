struct node {
    int value;
    struct node *next;
};

int list_sum(const struct node *n) {
    int s = 0;
    while (n) {
        s += n->value;
        n = n->next;
    }
    return s;
}

struct node *list_reverse(struct node *n) {
    struct node *prev = 0;
    while (n) {
        struct node *next = n->next;
        n->next = prev;
        prev = n;
        n = next;
    }
    return prev;
}

int list_max(const struct node *n, int dflt) {
    int m = dflt;
    for (; n; n = n->next)
        if (n->value > m)
            m = n->value;
    return m;
}

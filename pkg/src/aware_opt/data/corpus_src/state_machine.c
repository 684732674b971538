enum state { IDLE, NUM, WORD, SPACE };

int count_tokens(const char *s) {
    enum state st = IDLE;
    int tokens = 0;
    for (; *s; s++) {
        char c = *s;
        switch (st) {
        case IDLE:
        case SPACE:
            if (c >= '0' && c <= '9') { st = NUM; tokens++; }
            else if (c != ' ') { st = WORD; tokens++; }
            else st = SPACE;
            break;
        case NUM:
            if (c == ' ') st = SPACE;
            else if (c < '0' || c > '9') { st = WORD; tokens++; }
            break;
        case WORD:
            if (c == ' ') st = SPACE;
            break;
        }
    }
    return tokens;
}

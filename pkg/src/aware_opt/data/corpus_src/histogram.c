void histogram(const unsigned char *data, int n, int *bins, int nbins) {
    for (int b = 0; b < nbins; b++)
        bins[b] = 0;
    for (int i = 0; i < n; i++) {
        int b = data[i] * nbins / 256;
        if (b >= nbins)
            b = nbins - 1;
        bins[b]++;
    }
}

int histogram_mode(const int *bins, int nbins) {
    int best = 0;
    for (int b = 1; b < nbins; b++)
        if (bins[b] > bins[best])
            best = b;
    return best;
}

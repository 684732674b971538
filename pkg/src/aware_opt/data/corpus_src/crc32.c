unsigned crc_update(unsigned crc, const unsigned char *buf, int len, int bits, unsigned poly) {
    for (int i = 0; i < len; i++) {
        crc ^= buf[i];
        for (int k = 0; k < bits; k++)
            crc = (crc >> 1) ^ (poly & (0u - (crc & 1u)));
    }
    return crc;
}

unsigned crc32(const unsigned char *buf, int len) {
    return ~crc_update(0xFFFFFFFFu, buf, len, 8, 0xEDB88320u);
}

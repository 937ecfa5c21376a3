#include <math.h>
#include <stdio.h>
#include <string.h>

#include "claimwise.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            const char *e = cw_last_error();                               \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,         \
                    e ? e : "no error message");                           \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(int argc, char **argv) {
    char *s = NULL;
    CHECK(cw_build_copa_prompt("C0", "R0", &s) == CW_OK);
    CHECK(strcmp(s, "copa choice1: Supports choice2: Refutes premise: R0 question: C0") == 0);
    cw_string_free(s);

    CHECK(cw_compose_nle(CW_REFUTES, "R0", &s) == CW_OK);
    CHECK(strcmp(s, "The evidence refutes the claim because R0") == 0);
    char *nli = NULL;
    CHECK(cw_build_nli_prompt("C0", s, &nli) == CW_OK);
    CHECK(strcmp(nli, "cb hypothesis: C0 premise: The evidence refutes the claim because R0") == 0);
    cw_string_free(nli);
    cw_string_free(s);

    enum cw_verdict v;
    CHECK(cw_decode_verdict(" Supports ", &v) == CW_OK && v == CW_SUPPORTS);
    CHECK(cw_decode_verdict("maybe", &v) == CW_BACKEND);
    CHECK(cw_last_error() != NULL);
    CHECK(cw_map_verdict_label("Mostly True", &v) == CW_VALIDATION);

    uint8_t pred[4] = {0, 0, 1, 1}, gold[4] = {0, 1, 1, 1};
    double f1 = 0;
    CHECK(cw_macro_f1(pred, gold, 4, &f1) == CW_OK);
    CHECK(fabs(f1 - (2.0 / 3.0 + 0.8) / 2.0) < 1e-12);

    double pct = 0;
    CHECK(cw_one_decimal_percentage(168, 601, &pct) == CW_OK && pct == 27.9);

    double table[8];
    for (int m = 0; m < 8; m++) table[m] = (m & 1) * 1.0 + ((m >> 1) & 1) * 2.0 + ((m >> 2) & 1) * 4.0;
    double phi[3];
    CHECK(cw_exact_shapley(table, 3, phi) == CW_OK);
    CHECK(fabs(phi[0] - 1.0) < 1e-12 && fabs(phi[1] - 2.0) < 1e-12 && fabs(phi[2] - 4.0) < 1e-12);
    CHECK(cw_sampled_shapley(table, 3, 50, 7, phi) == CW_OK);
    CHECK(fabs(phi[0] + phi[1] + phi[2] - 7.0) < 1e-9);
    CHECK(cw_exact_shapley(NULL, 3, phi) == CW_NULL_POINTER);

    if (argc > 1) {
        struct cw_corpus *c = NULL;
        CHECK(cw_corpus_load(argv[1], CW_JSON_LINES, &c) == CW_OK);
        size_t dropped = 99;
        CHECK(cw_corpus_clean(c, NULL, &dropped) == CW_OK && dropped == 0);
        struct cw_corpus_stats st;
        CHECK(cw_corpus_get_stats(c, &st) == CW_OK);
        CHECK(st.total == 20 && st.supports == 10 && st.refutes == 10);
        double ratios[3] = {0.7, 0.15, 0.15};
        size_t sizes[3];
        CHECK(cw_corpus_split_sizes(c, ratios, 1, sizes) == CW_OK);
        CHECK(sizes[0] == 14 && sizes[1] == 3 && sizes[2] == 3);
        cw_corpus_free(c);
    }
    puts("ok");
    return 0;
}

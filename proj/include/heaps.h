/*
 * libheaps: Heaps functions of tagged texts, exact shuffled-ensemble
 * statistics of vocabulary growth, Heaps anomalies and excesses, and
 * corpus-level power-law fits.
 *
 * Every function returns a heaps_status. On failure heaps_last_error()
 * describes the problem; the message is per thread and stays valid until the
 * next call on that thread. Handles are opaque and owned by the caller, who
 * releases them with the matching *_free function. Strings returned through
 * `char **` are released with heaps_string_free.
 */
#ifndef HEAPS_H
#define HEAPS_H

#include <stddef.h>
#include <stdint.h>

#if defined(HEAPS_BUILDING_LIBRARY)
#define HEAPS_API __attribute__((visibility("default")))
#else
#define HEAPS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum heaps_status {
  HEAPS_OK = 0,
  HEAPS_ERR_INVALID_ARGUMENT = 1,
  HEAPS_ERR_IO = 2,
  HEAPS_ERR_PARSE = 3,
  HEAPS_ERR_UNKNOWN_POS_TAG = 4,
  HEAPS_ERR_EMPTY_TEXT = 5,
  HEAPS_ERR_DOMAIN = 6,
  HEAPS_ERR_DEGENERATE_INPUT = 7,
  HEAPS_ERR_NUMERICS = 8,
  HEAPS_ERR_GRID_MISMATCH = 9,
  HEAPS_ERR_TOO_LARGE = 10,
  HEAPS_ERR_PARTIAL_CORPUS = 11,
  HEAPS_ERR_INTERNAL = 12
} heaps_status;

typedef enum heaps_tag_class {
  HEAPS_TAG_NOUN = 0,
  HEAPS_TAG_VERB = 1,
  HEAPS_TAG_OTHER = 2
} heaps_tag_class;

typedef enum heaps_normalization {
  HEAPS_NORMALIZE_LOWER = 0,
  HEAPS_NORMALIZE_NONE = 1
} heaps_normalization;

typedef enum heaps_transform {
  HEAPS_FIT_LOGLOG = 0,
  HEAPS_FIT_LINLIN = 1,
  HEAPS_FIT_LINLOG = 2
} heaps_transform;

typedef struct heaps_tagmap heaps_tagmap;
typedef struct heaps_text heaps_text;
typedef struct heaps_spectrum heaps_spectrum;

HEAPS_API const char *heaps_last_error(void);
/* Stable machine-readable name, e.g. "UnknownPosTag". */
HEAPS_API const char *heaps_status_name(heaps_status status);
HEAPS_API const char *heaps_version(void);
HEAPS_API void heaps_string_free(char *s);

/* ---- tag maps --------------------------------------------------------- */

HEAPS_API heaps_status heaps_tagmap_default(heaps_tagmap **out);
/* Flat `POSTAG = noun|verb|other|ignore` file. */
HEAPS_API heaps_status heaps_tagmap_load(const char *path, heaps_tagmap **out);
HEAPS_API void heaps_tagmap_free(heaps_tagmap *map);

/* ---- texts ------------------------------------------------------------ */

typedef struct heaps_text_info {
  uint64_t total_words;          /* N */
  uint64_t vocabulary;           /* V */
  uint64_t words_per_class[3];   /* N_tag, indexed by heaps_tag_class */
  uint64_t vocabulary_per_class[3]; /* V_tag */
} heaps_text_info;

/* Reads a `surface<TAB>pos-tag` interchange file. `map` may be NULL for the
 * default Penn Treebank map; `id` may be NULL to use the file stem. */
HEAPS_API heaps_status heaps_text_load(const char *path, const heaps_tagmap *map,
                                       heaps_normalization normalization, const char *id,
                                       heaps_text **out);
HEAPS_API heaps_status heaps_text_from_tokens(const char *const *surfaces, const char *const *pos_tags,
                                              size_t count, const heaps_tagmap *map,
                                              heaps_normalization normalization, const char *id,
                                              heaps_text **out);
HEAPS_API void heaps_text_free(heaps_text *text);
HEAPS_API heaps_status heaps_text_get_info(const heaps_text *text, heaps_text_info *info);
/* Writes the interchange form of the text; build round-trips it. */
HEAPS_API heaps_status heaps_text_serialize(const heaps_text *text, char **out);

/* v(n) for n = 1..N into `values` (length N). `tag` < 0 gives the total,
 * otherwise the distinct words owned by that class. */
HEAPS_API heaps_status heaps_text_heaps_curve(const heaps_text *text, int tag, uint32_t *values, size_t length);

/* ---- multiplicity spectra -------------------------------------------- */

HEAPS_API heaps_status heaps_spectrum_from_text(const heaps_text *text, heaps_spectrum **out);
/* Pairs (m[i], c[i]): c[i] types occur exactly m[i] times. */
HEAPS_API heaps_status heaps_spectrum_from_pairs(const uint64_t *multiplicities, const uint64_t *types,
                                                 size_t count, heaps_spectrum **out);
HEAPS_API void heaps_spectrum_free(heaps_spectrum *spec);
HEAPS_API heaps_status heaps_spectrum_totals(const heaps_spectrum *spec, uint64_t *total_words,
                                             uint64_t *vocabulary, size_t *distinct);
/* Copies up to `capacity` entries sorted by increasing m. */
HEAPS_API heaps_status heaps_spectrum_entries(const heaps_spectrum *spec, uint64_t *multiplicities,
                                              uint64_t *types, size_t capacity);

/* ---- rarefaction ------------------------------------------------------ */

/* C(N-m, n) / C(N, n). */
HEAPS_API heaps_status heaps_binomial_tail_ratio(uint64_t total_words, uint64_t multiplicity, uint64_t n,
                                                 double *out);

/* Evaluation grid: "full" or "count:K". With points == NULL only *count is
 * written; otherwise up to `capacity` points are copied. */
HEAPS_API heaps_status heaps_grid(const char *spec, uint64_t total_words, uint64_t *points, size_t capacity,
                                  size_t *count);

/* v̄(n) and σ_v²(n) at strictly increasing points in [1, N]. Either output may be NULL.
 * threads = 0 uses every hardware thread. */
HEAPS_API heaps_status heaps_ensemble(const heaps_spectrum *spec, const uint64_t *points, size_t count,
                                      unsigned threads, double *mean, double *variance);

/* ---- fitting ---------------------------------------------------------- */

typedef struct heaps_fit_result {
  double slope;
  double slope_se;
  double intercept;
  double intercept_se;
  double pearson_r;
  heaps_transform transform;
  size_t n_points;
} heaps_fit_result;

HEAPS_API heaps_status heaps_fit(const double *x, const double *y, size_t count, heaps_transform transform,
                                 heaps_fit_result *out);
HEAPS_API heaps_status heaps_proportionality_fit(const double *x, const double *y, size_t count, double *ratio,
                                                 double *ratio_se);

/* ---- reports (JSON documents) ---------------------------------------- */

typedef struct heaps_options {
  const char *grid;          /* "full" or "count:K"; NULL = "count:1000" */
  const char *tagmap_path;   /* NULL = default Penn Treebank map */
  heaps_normalization normalization;
  unsigned threads;          /* 0 = hardware concurrency */
  unsigned jobs;             /* corpus worker pool size, 0 = hardware concurrency */
  uint64_t seed;
  heaps_transform mean_rel_transform; /* abscissa transform of the <delta> vs V fit */
} heaps_options;

HEAPS_API void heaps_options_init(heaps_options *options);

/* Analyzes one interchange file. With out_dir set, writes <id>.json,
 * <id>.curves.csv and <id>.ensemble.csv there. `json` receives the summary
 * document; `curves_csv` (optional) receives the curve table. */
HEAPS_API heaps_status heaps_analyze_work(const char *path, const char *id, const heaps_options *options,
                                          const char *out_dir, char **json, char **curves_csv);

/* Analyzes every work of a manifest (`id<TAB>path<TAB>title`). Returns
 * HEAPS_ERR_PARTIAL_CORPUS, with the report still filled in, when some works
 * failed. */
HEAPS_API heaps_status heaps_analyze_corpus(const char *manifest_path, const heaps_options *options,
                                            const char *out_dir, char **json);

/* Corpus fits over a `code,author,title,year,N,V` table (no texts). */
HEAPS_API heaps_status heaps_table_report(const char *table_path, char **json);

/* Fit over a CSV whose first two columns are x,y (header row required).
 * `kind` is loglog, linlin, linlog or proportional. `residuals_csv` is
 * optional and receives x,y,tx,ty,residual rows. */
HEAPS_API heaps_status heaps_fit_file(const char *csv_path, const char *kind, char **json, char **residuals_csv);

/* Oracle checks; `json` receives the diagnostics, `pass` the verdict. */
HEAPS_API heaps_status heaps_oracle_check_partitions(uint64_t max_total, char **json, int *pass);
HEAPS_API heaps_status heaps_oracle_check_exhaustive(const heaps_spectrum *spec, char **json, int *pass);
HEAPS_API heaps_status heaps_oracle_check_monte_carlo(const heaps_spectrum *spec, uint64_t samples, uint64_t seed,
                                                      const char *grid, unsigned threads, char **json,
                                                      int *pass);

#ifdef __cplusplus
}
#endif

#endif /* HEAPS_H */

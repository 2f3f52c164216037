#ifndef ZKG_H
#define ZKG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZkgStatus {
  ZKG_STATUS_OK = 0,
  ZKG_STATUS_NULL_POINTER = 1,
  ZKG_STATUS_INVALID_UTF8 = 2,
  ZKG_STATUS_INVALID_ARGUMENT = 3,
  ZKG_STATUS_CONFIG = 4,
  ZKG_STATUS_NUMERICAL = 5,
  ZKG_STATUS_IO = 6,
  ZKG_STATUS_CHECKPOINT = 7,
  ZKG_STATUS_PANIC = 8,
} ZkgStatus;

// Opaque simulation handle.
typedef struct ZkgSimulation ZkgSimulation;

// Snapshot of the monitored quantities at the current time.
typedef struct ZkgDiagnostics {
  double t;
  double mass;
  double energy;
  double sup_u;
  double sup_n;
  double sob_f;
  double xf;
  double x2f;
  double sob_g;
  double besov_w;
  double xnorm_components[5];
  double apriori_g[3];
  double cauchy_f;
} ZkgDiagnostics;

typedef struct ZkgDecayFit {
  double slope;
  double std_error;
  double intercept;
  size_t samples;
} ZkgDecayFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *zkg_last_error(void);

// Library version as a static string.
const char *zkg_version(void);

// Builds data from a TOML configuration string and returns a new handle.
//
// # Safety
// `config_toml` is a nul-terminated string; `out` is valid for writes.
enum ZkgStatus zkg_simulation_new(const char *config_toml, struct ZkgSimulation **out);

// Restores a handle from a checkpoint written under a compatible configuration.
//
// # Safety
// String arguments are nul-terminated; `out` is valid for writes.
enum ZkgStatus zkg_simulation_from_checkpoint(const char *config_toml,
                                              const char *path,
                                              struct ZkgSimulation **out);

// Releases a handle; null is ignored.
//
// # Safety
// `sim` is null or a handle not yet freed.
void zkg_simulation_free(struct ZkgSimulation *sim);

// Takes `steps` steps of the configured size.
//
// # Safety
// `sim` is a live handle.
enum ZkgStatus zkg_simulation_advance(struct ZkgSimulation *sim, uint64_t steps);

// # Safety
// `sim` is a live handle; `t` is valid for writes.
enum ZkgStatus zkg_simulation_time(const struct ZkgSimulation *sim, double *t);

// # Safety
// `sim` is a live handle; `steps` is valid for writes.
enum ZkgStatus zkg_simulation_step_count(const struct ZkgSimulation *sim, uint64_t *steps);

// # Safety
// `sim` is a live handle; `out` is valid for writes.
enum ZkgStatus zkg_simulation_diagnostics(const struct ZkgSimulation *sim,
                                          struct ZkgDiagnostics *out);

// # Safety
// `sim` is a live handle; `path` is nul-terminated.
enum ZkgStatus zkg_simulation_write_checkpoint(const struct ZkgSimulation *sim, const char *path);

// Schrodinger-wave phase at `(xi, eta)`; `branch` is +1 or -1.
//
// # Safety
// `xi` and `eta` point to three doubles; `out` is valid for writes.
enum ZkgStatus zkg_phi(const double *xi, const double *eta, int32_t branch, double *out);

// Wave-Schrodinger phase at `(xi, eta)`; `branch` is +1 or -1.
//
// # Safety
// As for [`zkg_phi`].
enum ZkgStatus zkg_psi(const double *xi, const double *eta, int32_t branch, double *out);

// Power-law fit `value ~ C t^slope` over samples with `t0 <= t <= t1`.
//
// # Safety
// `t` and `value` point to `len` doubles each; `out` is valid for writes.
enum ZkgStatus zkg_fit_decay(const double *t,
                             const double *value,
                             size_t len,
                             double t0,
                             double t1,
                             struct ZkgDecayFit *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ZKG_H */

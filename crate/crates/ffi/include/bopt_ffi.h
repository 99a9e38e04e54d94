/* C interface to the bopt VQE optimization toolkit. */

#ifndef BOPT_FFI_H
#define BOPT_FFI_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Shot-handling mode of the observation model.
 */
typedef enum BoptShotMode {
  BOPT_SHOT_MODE_EXACT = 0,
  BOPT_SHOT_MODE_SAMPLED = 1,
  BOPT_SHOT_MODE_GAUSSIAN = 2,
} BoptShotMode;

/**
 * Result of every fallible call.
 */
typedef enum BoptStatus {
  BOPT_STATUS_OK = 0,
  BOPT_STATUS_NULL_ARGUMENT = 1,
  BOPT_STATUS_INVALID_UTF8 = 2,
  BOPT_STATUS_PARSE_ERROR = 3,
  BOPT_STATUS_DIMENSION_ERROR = 4,
  BOPT_STATUS_EVAL_ERROR = 5,
  BOPT_STATUS_CONFIG_ERROR = 6,
  BOPT_STATUS_RUN_ERROR = 7,
  BOPT_STATUS_OUT_OF_RANGE = 8,
  BOPT_STATUS_PANIC = 9,
} BoptStatus;

/**
 * Opaque parameterized ansatz circuit.
 */
typedef struct BoptAnsatz BoptAnsatz;

/**
 * Opaque Pauli-string Hamiltonian.
 */
typedef struct BoptHamiltonian BoptHamiltonian;

/**
 * Opaque optimization trace.
 */
typedef struct BoptRunRecord BoptRunRecord;

/**
 * Observation model (plain data; no handle needed).
 */
typedef struct BoptNoiseConfig {
  enum BoptShotMode shot_mode;
  /**
   * Gaussian-mode scale; the noise std is `sigma_s / sqrt(shots)`.
   */
  double sigma_s;
  bool hardware_enabled;
  double hw_bias_slope;
  double hw_bias_zero;
  double hw_sigma;
} BoptNoiseConfig;

/**
 * Optimization settings for [`bopt_optimize`].
 */
typedef struct BoptRunConfig {
  /**
   * Total budget in high-shot units.
   */
  uint64_t budget_units;
  /**
   * Low-shot initialization budget (0 disables the topological prior).
   */
  uint64_t init_units;
  uint64_t high_shots;
  uint64_t low_shots;
  /**
   * Use the 2*pi-periodic kernel (otherwise Matérn 5/2).
   */
  bool periodic_kernel;
  /**
   * LCB confidence parameter.
   */
  double beta;
  uint64_t seed;
} BoptRunConfig;

/**
 * One logged objective evaluation.
 */
typedef struct BoptRunRow {
  size_t iteration;
  double cumulative_cost;
  double observed_energy;
  double best_observed;
} BoptRunRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *bopt_last_error_message(void);

/**
 * Parse a Hamiltonian from its text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BoptStatus bopt_hamiltonian_parse(const char *text, struct BoptHamiltonian **out);

/**
 * Load a Hamiltonian file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BoptStatus bopt_hamiltonian_load(const char *path, struct BoptHamiltonian **out);

/**
 * # Safety
 * `handle` must come from a `bopt_hamiltonian_*` constructor; passing it
 * twice is undefined behavior.
 */
void bopt_hamiltonian_free(struct BoptHamiltonian *handle);

/**
 * # Safety
 * `handle` must be a live Hamiltonian handle.
 */
size_t bopt_hamiltonian_n_qubits(const struct BoptHamiltonian *handle);

/**
 * # Safety
 * `handle` must be a live Hamiltonian handle.
 */
size_t bopt_hamiltonian_n_terms(const struct BoptHamiltonian *handle);

/**
 * Exact minimum eigenvalue via dense diagonalization (up to 12 qubits).
 *
 * # Safety
 * `handle` must be a live Hamiltonian handle and `out` a valid pointer.
 */
enum BoptStatus bopt_hamiltonian_ground_energy(const struct BoptHamiltonian *handle, double *out);

/**
 * Hardware-efficient ansatz: `depth` layers of per-qubit RY rotations and
 * all-pairs CNOTs after X gates on the `hf_bits` occupations.
 *
 * # Safety
 * `hf_bits` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BoptStatus bopt_ansatz_hea(size_t n_qubits,
                                size_t depth,
                                const char *hf_bits,
                                struct BoptAnsatz **out);

/**
 * Real-amplitudes ansatz: H on every qubit, an RY layer, then `depth`
 * repetitions of a linear CNOT chain plus another RY layer.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BoptStatus bopt_ansatz_real_amplitudes(size_t n_qubits, size_t depth, struct BoptAnsatz **out);

/**
 * # Safety
 * `handle` must come from a `bopt_ansatz_*` constructor; passing it twice
 * is undefined behavior.
 */
void bopt_ansatz_free(struct BoptAnsatz *handle);

/**
 * # Safety
 * `handle` must be a live ansatz handle.
 */
size_t bopt_ansatz_param_count(const struct BoptAnsatz *handle);

/**
 * Noise-free energy expectation at the given parameters.
 *
 * # Safety
 * `theta` must point to `theta_len` doubles; handles must be live.
 */
enum BoptStatus bopt_energy_exact(const struct BoptHamiltonian *hamiltonian,
                                  const struct BoptAnsatz *ansatz,
                                  const double *theta,
                                  size_t theta_len,
                                  double *out);

/**
 * One observed energy under the given shot count and noise model,
 * reproducible from the seed.
 *
 * # Safety
 * `theta` must point to `theta_len` doubles; handles must be live; `noise`
 * and `out` must be valid pointers.
 */
enum BoptStatus bopt_energy_observed(const struct BoptHamiltonian *hamiltonian,
                                     const struct BoptAnsatz *ansatz,
                                     const double *theta,
                                     size_t theta_len,
                                     uint64_t shots,
                                     const struct BoptNoiseConfig *noise,
                                     uint64_t seed,
                                     double *out);

/**
 * Run the BOPT loop against the simulated objective and return the trace.
 *
 * # Safety
 * Handles must be live; `noise`, `config`, and `out` must be valid
 * pointers.
 */
enum BoptStatus bopt_optimize(const struct BoptHamiltonian *hamiltonian,
                              const struct BoptAnsatz *ansatz,
                              const struct BoptNoiseConfig *noise,
                              const struct BoptRunConfig *config,
                              struct BoptRunRecord **out);

/**
 * # Safety
 * `handle` must come from `bopt_optimize`; passing it twice is undefined
 * behavior.
 */
void bopt_run_record_free(struct BoptRunRecord *handle);

/**
 * # Safety
 * `handle` must be a live run-record handle.
 */
size_t bopt_run_record_len(const struct BoptRunRecord *handle);

/**
 * Number of parameters in each row's theta vector.
 *
 * # Safety
 * `handle` must be a live run-record handle.
 */
size_t bopt_run_record_theta_dim(const struct BoptRunRecord *handle);

/**
 * Copy row `index` into `out`.
 *
 * # Safety
 * `handle` must be a live run-record handle and `out` a valid pointer.
 */
enum BoptStatus bopt_run_record_row(const struct BoptRunRecord *handle,
                                    size_t index,
                                    struct BoptRunRow *out);

/**
 * Copy row `index`'s parameter vector into `buffer` (`buffer_len` must be
 * at least the theta dimension).
 *
 * # Safety
 * `handle` must be a live run-record handle; `buffer` must point to
 * `buffer_len` writable doubles.
 */
enum BoptStatus bopt_run_record_theta(const struct BoptRunRecord *handle,
                                      size_t index,
                                      double *buffer,
                                      size_t buffer_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOPT_FFI_H */

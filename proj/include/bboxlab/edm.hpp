#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bboxlab/errors.hpp"
#include "bboxlab/rng.hpp"

namespace bboxlab {

// EDM preconditioning scalars:
//   lambda_skip(s)  = 1 / (s^2 + 1)
//   lambda_out(s)   = -s / sqrt(s^2 + 1)
//   lambda_in(s)    = 1 / sqrt(s^2 + 1)
//   lambda_noise(s) = ln(s) / 4            (undefined at s = 0)
double lambda_skip(double sigma);
double lambda_out(double sigma);
double lambda_in(double sigma);
double lambda_noise(double sigma);

// Strictly decreasing noise levels with a final appended 0.
struct SigmaSchedule {
    std::vector<double> sigmas;

    std::size_t step_count() const { return sigmas.empty() ? 0 : sigmas.size() - 1; }
};

// Conventional toy-sampler defaults. The sigma ceiling follows the Stable
// Diffusion k-diffusion convention; at 50 plain Euler steps it keeps the
// integration bias of the probability-flow ODE within a few percent, which
// a ceiling of 80 does not.
inline constexpr int kDefaultScheduleSteps = 50;
inline constexpr double kDefaultSigmaMin = 0.002;
inline constexpr double kDefaultSigmaMax = 14.6146;
inline constexpr double kDefaultRho = 7.0;

// rho-spaced schedule: sigma_i = (smax^(1/rho) + i/(n-1)*(smin^(1/rho) -
// smax^(1/rho)))^rho for i = 0..n-1, then an appended 0. The endpoints are
// set to sigma_max / sigma_min exactly.
SigmaSchedule karras_schedule(int n_steps = kDefaultScheduleSteps,
                              double sigma_min = kDefaultSigmaMin,
                              double sigma_max = kDefaultSigmaMax,
                              double rho = kDefaultRho);

using Tensor = std::vector<double>;

// Abstract denoiser core u(z_scaled, noise_embedding); any conditioning is
// closed over by the callable.
using DenoiserCore = std::function<Tensor(const Tensor&, double)>;

// The preconditioned combination
//   d(z, s) = lambda_skip(s)*z + lambda_out(s)*u(lambda_in(s)*z, lambda_noise(s)).
// At s = 0 the combination degenerates to d(z, 0) = z and u is not invoked
// (lambda_out(0) = 0, and lambda_noise is undefined there).
class PreconditionedDenoiser {
public:
    explicit PreconditionedDenoiser(DenoiserCore core) : core_(std::move(core)) {}

    Tensor operator()(const Tensor& z, double sigma) const;

private:
    DenoiserCore core_;
};

// x + sigma * eps with standard-normal eps drawn from the given generator.
Tensor add_noise(const Tensor& x, double sigma, GaussianRng& rng);

// Euler probability-flow sampler: z starts at sigma_0 * eps; each step moves
// along slope (z - d(z, sigma_i)) / sigma_i to the next level.
Tensor euler_sample(const PreconditionedDenoiser& denoiser,
                    const SigmaSchedule& schedule, std::size_t size,
                    GaussianRng& rng);

// Closed-form posterior-mean denoiser for scalar data ~ N(0, s^2):
// d(z, sigma) = z * s^2 / (s^2 + sigma^2). Used as the sampler oracle.
PreconditionedDenoiser gaussian_posterior_denoiser(double data_std);

// First-dimension conditioning stack: initial bbox latents at the front, the
// repeated initial-frame latent in the middle, the final bbox latent at the
// end.
struct LatentStack {
    std::vector<Tensor> entries;
};

LatentStack assemble_conditioning_stack(const std::vector<Tensor>& b_initial,
                                        const Tensor& z0, const Tensor& b_final,
                                        int n);

}  // namespace bboxlab

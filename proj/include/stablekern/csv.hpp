#ifndef STABLEKERN_CSV_HPP
#define STABLEKERN_CSV_HPP

#include "stablekern/estimator.hpp"
#include "stablekern/maxent.hpp"
#include "stablekern/simulation.hpp"
#include "stablekern/spectral.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace stablekern::io {

// %.16e (17 significant digits); exact zeros are written as "0".
[[nodiscard]] std::string format_number(double v);

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
[[nodiscard]] Eigen::MatrixXd read_matrix_csv(std::istream& is);

// Header "t,s,value", then one row per band entry with t >= s, 1-based.
void write_bands_csv(std::ostream& os, const BandSpec& bands);
// Dimension and bandwidth are inferred from the largest t and t - s; every entry
// inside the band must be present exactly once (either orientation).
[[nodiscard]] BandSpec read_bands_csv(std::istream& is);

// Header "t,u,y"; t must run 1 .. N.
void write_dataset_csv(std::ostream& os, const Dataset& data);
[[nodiscard]] Dataset read_dataset_csv(std::istream& is);

// Header "theta,phi".
void write_psd_csv(std::ostream& os, const Psd& spectrum);

// Header "run,estimator,airf,beta,alpha,delta,gamma,lambda,sigma2,seconds".
// Runs are 1-based; failed fits carry nan values, parameters a family does not
// use are left empty.
void write_mc_csv(std::ostream& os, const MCResult& result);

// Fields family, beta, alpha, delta, gamma, lambda, sigma2, nll, g_hat; unused
// kernel parameters are null.
[[nodiscard]] std::string estimate_to_json(const EstimateResult& result, int indent = 2);

[[nodiscard]] std::string read_file(const std::string& path);

}  // namespace stablekern::io

#endif

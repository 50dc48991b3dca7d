#pragma once

#include <array>
#include <stdexcept>

#include "relnet/phy.hpp"

namespace relnet {

enum class StorageMode { exclusive, duplicate };

// Which section's storage semantics generate the endogenous arrival rates:
// the throughput/stability analysis splits the both-decode mass with the
// p_a probabilities, the delay analysis duplicates it into both queues.
enum class ArrivalConvention { stability_section, delay_section };

struct SystemParams {
    double t1 = 0.0, t2 = 0.0;        // source transmission probabilities
    double alpha1 = 0.0, alpha2 = 0.0;
    double alpha1_star = 0.0, alpha2_star = 0.0;
    double pa[2][2] = {{1, 0}, {0, 1}};  // pa[user][relay], exclusive storage
    double lambda_hat1 = 0.0, lambda_hat2 = 0.0;
    int n_users = 2;
    StorageMode storage = StorageMode::exclusive;

    double tbar() const { return (1.0 - t1) * (1.0 - t2); }
    SystemParams swapped() const;
    void validate() const;
};

// Every scalar the analysis and the boundary-value machinery consume.
struct DerivedCoefficients {
    double tb = 0.0;                   // t1bar * t2bar
    double delta1 = 0.0, delta2 = 0.0;
    double halpha1 = 0.0, halpha2 = 0.0;   // \hat{alpha}_i
    double h1 = 0.0, h2 = 0.0;         // alpha_1 \hat{alpha}_2, alpha_2 \hat{alpha}_1
    double sstar = 0.0, wstar = 0.0;   // alpha*_1 P*_1, alpha*_2 P*_2
    double d1 = 0.0, d2 = 0.0;
    double L1 = 0.0, L2 = 0.0, L3 = 0.0;   // delay-model storage masses
    double lam11 = 0.0, lam12 = 0.0, lam21 = 0.0, lam22 = 0.0;  // delay convention
    double lambda_hat1 = 0.0, lambda_hat2 = 0.0;
    double lam1 = 0.0, lam2 = 0.0;     // total arrival rates (delay convention)
    double rho = 0.0;
    double sigma = 0.0;                // h1/sstar + h2/wstar

    DerivedCoefficients swapped() const;
};

DerivedCoefficients derive_coefficients(const SystemParams& params,
                                        const SuccessProbabilities& probs);

// lam[0]=lam11, lam[1]=lam12, lam[2]=lam21, lam[3]=lam22.
std::array<double, 4> endogenous_arrivals_two_user(const SystemParams& params,
                                                   const SuccessProbabilities& probs,
                                                   ArrivalConvention convention);

// Conditional relay service rates given the other queue's empty probability.
std::pair<double, double> service_rates(const SystemParams& params,
                                        const SuccessProbabilities& probs,
                                        std::pair<double, double> pr_empty);

enum class CaseKind { dirichlet, riemann_hilbert };

struct CaseInfo {
    CaseKind kind = CaseKind::riemann_hilbert;
    double sigma = 0.0;
    double h00_dirichlet = 0.0;  // 1 - rho, meaningful in the Dirichlet case
    // In the RH case H(1,0), H(0,1) are affine in H(0,0):
    //   H(1,0) = rd10_const + rd10_slope * H(0,0)
    double rd10_const = 0.0, rd10_slope = 0.0;
    double rd01_const = 0.0, rd01_slope = 0.0;
};

CaseInfo classify_case(const DerivedCoefficients& c, double tol = 1e-9);

}  // namespace relnet

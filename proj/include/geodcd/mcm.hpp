#pragma once

// Modeled clustering matrices: for each spectral method, a d x d matrix whose
// top-k left singular subspace is the method's spectral embedding.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geodcd/graph.hpp"
#include "geodcd/linalg.hpp"

namespace geodcd {

enum class Method {
  USC,
  NSC,
  SMM,
  BHC,
  SRSC,
  GMSC,
  SPMSC,
  OSC,
  CSC,
  HSC,
  DDSC,
  BSC,
  RWSC,
  PMLSC,
  SCC_SEND,
  SCC_RECEIVE,
};

std::string_view method_name(Method m);
Method method_from_name(std::string_view name);  // InputError on unknown

enum class Modality { simple, signed_, overlapping, hierarchical, directed, multiview, cocluster };
Modality method_modality(Method m);

struct MethodSpec {
  Method method = Method::NSC;
  double p = 1.0;          // power-mean exponent (SPMSC, PMLSC)
  double epsilon = 1e-6;   // spectrum shift / eigenvalue floor for negative p
  std::optional<double> r;    // Bethe-Hessian parameter, default sqrt(mean degree)
  std::optional<double> tau;  // SCC / degree regularization, default mean degree
  std::optional<double> usc_shift;  // USC n, default 2 * max degree
  bool regularize_degrees = false;  // D <- D + tau I for NSC/RWSC/DDSC
  double fuzzifier = 2.0;  // CSC
  double p_thresh = 0.2;   // soft -> binary threshold (OSC, CSC)
};

void validate(const MethodSpec& spec);

struct Mcm {
  Mat matrix;
  Method method = Method::NSC;
  std::optional<int> k_hint;
};

Mcm mcm_generic(const Mat& r, bool leading);
Mcm mcm_usc(const GraphSnapshot& g, std::optional<double> n = std::nullopt);
Mcm mcm_nsc(const GraphSnapshot& g, bool regularize = false);
Mcm mcm_smm(const GraphSnapshot& g);
Mcm mcm_bhc(const GraphSnapshot& g, std::optional<double> r = std::nullopt);
Mcm mcm_signed(const GraphSnapshot& g, const MethodSpec& spec);
Mcm mcm_directed(const GraphSnapshot& g, const MethodSpec& spec);
Mcm mcm_multiview(const GraphSnapshot& g, const MethodSpec& spec);
std::pair<Mcm, Mcm> mcm_coclustering(const GraphSnapshot& g, const MethodSpec& spec);

// OSC: MCM whose top-k subspace is the leading eigenspace of A, and the
// embedding X = U (U^T A U)^{1/2} for any orthonormal basis U of it.
Mcm mcm_osc(const GraphSnapshot& g);
Mat overlap_embedding(const Mat& a, const Mat& u);
Mat mcm_overlap(const GraphSnapshot& g, int k);  // X = V_k Lambda_k^{1/2}

// Building blocks, exposed for tests.
Mat laplacian(const Mat& a);                       // D - A
Mat normalized_laplacian(const Mat& a, double tau = 0.0);  // I - D^{-1/2} A D^{-1/2}
Mat signless_normalized(const Mat& a, double tau = 0.0);   // D^{-1/2}(D + A)D^{-1/2}
Mat modularity_matrix(const Mat& a);
Mat bethe_hessian(const Mat& a, double r);
Mat signed_ratio_laplacian(const Mat& a);         // Dbar - A
Mat degree_discounted(const Mat& a, double tau = 0.0);
Mat rw_laplacian(const Mat& a, double tau = 0.0);

// Dispatch on spec.method. SCC_SEND / SCC_RECEIVE pick the matching side.
Mcm build_mcm(const GraphSnapshot& g, const MethodSpec& spec);

}  // namespace geodcd

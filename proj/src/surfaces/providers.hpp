#pragma once

#include <memory>

#include "continuation.hpp"
#include "thetafay/surface.hpp"

namespace thetafay::detail {

using ProviderPtr = std::shared_ptr<const CurveProvider>;

ProviderPtr make_hyperelliptic(const SurfaceConfig& cfg, const nlohmann::json* state);
ProviderPtr make_superelliptic(const SurfaceConfig& cfg, const nlohmann::json* state);
ProviderPtr make_plane_cubic(const SurfaceConfig& cfg, const nlohmann::json* state);
ProviderPtr make_genus1_analytic(const SurfaceConfig& cfg);
ProviderPtr make_direct_file(const SurfaceConfig& cfg);

// Genus-1 lattice bookkeeping shared by the superelliptic and plane cubic
// providers.
struct Genus1Basis {
  cplx omegaA, omegaB;      // periods of the unnormalized differential
  Eigen::Matrix2i coeff;    // rows: A, B in generator coordinates
  bool real = false;
  int H = 0;
  double defect = 0.0;
  std::string status;
};

Genus1Basis adapt_genus1(cplx g1, cplx g2, bool conjClosed);
// Z-basis of the lattice generated by `periods`; throws if they are not a
// rank-2 lattice.
void lattice_basis(const std::vector<cplx>& periods, cplx& b1, cplx& b2);

// Helpers shared by providers.
std::vector<PathNode> route_nodes(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& path,
                                  const std::vector<cplx>& branch);
bool route_crosses(const std::vector<PathNode>& nodes, const std::vector<std::pair<cplx, cplx>>& cuts);
std::string describe_route(const std::vector<PathNode>& nodes);
PointJet scale_jet(const PointJet& j, cplx beta, cplx mu);
// Lexicographic point order used to make reversal exact.
bool canonical_less(const MarkedPoint& a, const MarkedPoint& b);
// Point a distance eps (in the base local parameter) along a leg, used by
// the third-kind oracle; returns the base-coordinate value of the point.
cplx offset_lambda(const MarkedPoint& p, cplx towards, double eps);

cplx cvec_json_c(const nlohmann::json& j);
nlohmann::json json_c(cplx z);
nlohmann::json json_cmat(const CMat& m);
CMat cmat_json(const nlohmann::json& j);

}  // namespace thetafay::detail

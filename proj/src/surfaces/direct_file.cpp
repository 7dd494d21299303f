// Surface given by a period matrix plus tabulated point data.
#include <map>

#include "providers.hpp"

namespace thetafay::detail {

namespace {

CVec vec_json(const nlohmann::json& j) {
  CVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = cvec_json_c(j[i]);
  return v;
}

class DirectFile final : public CurveProvider {
 public:
  explicit DirectFile(const SurfaceConfig& cfg) {
    const auto& d = cfg.direct;
    if (!d.is_object() || !d.contains("B")) throw std::invalid_argument("directFile payload needs B");
    B_ = cmat_json(d.at("B"));
    g_ = int(B_.rows());
    if (d.contains("points"))
      for (const auto& p : d.at("points")) {
        Entry e;
        e.label = p.at("label").get<std::string>();
        e.jet.V = vec_json(p.at("V"));
        e.jet.W = p.contains("W") ? vec_json(p.at("W")) : CVec::Zero(g_);
        e.jet.U = p.contains("U") ? vec_json(p.at("U")) : CVec::Zero(g_);
        if (e.jet.V.size() != g_ || e.jet.W.size() != g_ || e.jet.U.size() != g_)
          throw std::invalid_argument("directFile jet has wrong dimension");
        index_[e.label] = int(entries_.size());
        entries_.push_back(e);
      }
    if (d.contains("abel"))
      for (const auto& a : d.at("abel")) {
        int i = lookup(a.at("from").get<std::string>()), j = lookup(a.at("to").get<std::string>());
        CVec r = vec_json(a.at("r"));
        if (r.size() != g_) throw std::invalid_argument("directFile Abel increment has wrong dimension");
        abel_[{i, j}] = r;
      }
    if (d.contains("H")) {
      RealStructure rs;
      const auto& h = d.at("H");
      rs.H = IMat(g_, g_);
      for (int i = 0; i < g_; ++i)
        for (int k = 0; k < g_; ++k) rs.H(i, k) = h[i][k].get<int>();
      rs.tau = "given";
      real_ = rs;
    }
  }

  std::string kind() const override { return "directFile"; }
  int genus() const override { return g_; }
  CMat riemann() const override { return B_; }

  std::optional<RealStructure> real_structure(std::string& status) const override {
    status = real_ ? "given" : "no real structure supplied";
    return real_;
  }

  MarkedPoint point(cplx lambda, int) const override {
    int i = int(std::lround(lambda.real()));
    if (i < 0 || i >= int(entries_.size())) throw std::invalid_argument("directFile point index out of range");
    MarkedPoint p;
    p.lambda = double(i);
    p.sheet = i;
    p.label = entries_[i].label;
    return p;
  }

  MarkedPoint point_with_y(cplx lambda, cplx) const override { return point(lambda, 0); }

  PointJet base_jet(const MarkedPoint& p) const override { return entries_.at(p.sheet).jet; }

  AbelPath abel(const MarkedPoint& a, const MarkedPoint& b, const PathSpec&) const override {
    AbelPath out;
    out.a = a;
    out.b = b;
    if (a.sheet == b.sheet) {
      out.r = CVec::Zero(g_);
      out.contour = "trivial";
      return out;
    }
    auto it = abel_.find({a.sheet, b.sheet});
    if (it != abel_.end()) {
      out.r = it->second;
    } else if ((it = abel_.find({b.sheet, a.sheet})) != abel_.end()) {
      out.r = -it->second;
    } else {
      bool found = false;
      for (std::size_t c = 0; c < entries_.size() && !found; ++c) {
        auto p = find_dir(a.sheet, int(c)), q = find_dir(int(c), b.sheet);
        if (p && q) {
          out.r = *p + *q;
          found = true;
        }
      }
      if (!found) throw std::invalid_argument("directFile has no Abel increment for this pair");
    }
    out.contour = "tabulated";
    return out;
  }

 private:
  struct Entry {
    std::string label;
    PointJet jet;
  };

  int lookup(const std::string& l) const {
    auto it = index_.find(l);
    if (it == index_.end()) throw std::invalid_argument("directFile: unknown point label " + l);
    return it->second;
  }

  std::optional<CVec> find_dir(int i, int j) const {
    auto it = abel_.find({i, j});
    if (it != abel_.end()) return it->second;
    it = abel_.find({j, i});
    if (it != abel_.end()) return CVec(-it->second);
    return std::nullopt;
  }

  CMat B_;
  int g_ = 0;
  std::vector<Entry> entries_;
  std::map<std::string, int> index_;
  std::map<std::pair<int, int>, CVec> abel_;
  std::optional<RealStructure> real_;
};

}  // namespace

ProviderPtr make_direct_file(const SurfaceConfig& cfg) { return std::make_shared<DirectFile>(cfg); }

}  // namespace thetafay::detail

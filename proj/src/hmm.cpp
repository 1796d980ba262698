#include "accentasr/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace accentasr {

void DiagGmm::refresh_gconsts() {
  gconsts.resize(weights.size());
  for (size_t c = 0; c < weights.size(); ++c) {
    double logdet = 0.0;
    for (double v : vars[c]) logdet += std::log(v);
    gconsts[c] = -0.5 * (dim * std::log(2.0 * M_PI) + logdet);
  }
}

static double component_loglik(const DiagGmm& g, size_t c, std::span<const float> frame) {
  double maha = 0.0;
  const auto& mean = g.means[c];
  const auto& var = g.vars[c];
  for (int d = 0; d < g.dim; ++d) {
    double diff = frame[d] - mean[d];
    maha += diff * diff / var[d];
  }
  return g.gconsts[c] - 0.5 * maha;
}

double DiagGmm::log_likelihood(std::span<const float> frame) const {
  if (num_components() == 1)
    return std::log(weights[0]) + component_loglik(*this, 0, frame);
  double total = kLogZero;
  for (size_t c = 0; c < weights.size(); ++c)
    total = log_sum_exp(total, std::log(weights[c]) + component_loglik(*this, c, frame));
  return total;
}

double DiagGmm::component_posteriors(std::span<const float> frame, std::vector<double>& post) const {
  post.resize(weights.size());
  double total = kLogZero;
  for (size_t c = 0; c < weights.size(); ++c) {
    post[c] = std::log(weights[c]) + component_loglik(*this, c, frame);
    total = log_sum_exp(total, post[c]);
  }
  for (auto& p : post) p = std::exp(p - total);
  return total;
}

const PhoneHmm& AcousticModel::hmm(const std::string& unit) const {
  return hmms[index_of(unit)];
}

int AcousticModel::index_of(const std::string& unit) const {
  auto it = unit_index.find(unit);
  if (it == unit_index.end())
    throw ValidationError("acoustic model has no HMM for unit \"" + unit + "\"");
  return it->second;
}

int64_t AcousticModel::total_densities() const {
  int64_t n = 0;
  for (const auto& h : hmms)
    for (const auto& s : h.states) n += s.num_components();
  return n;
}

double AcousticModel::emission_logprob(const std::string& unit, int state,
                                       std::span<const float> frame) const {
  const PhoneHmm& h = hmm(unit);
  if (state < 0 || state >= h.num_states())
    throw ValidationError("state index " + std::to_string(state) + " out of range for unit \"" +
                          unit + "\"");
  if (static_cast<int>(frame.size()) != dim)
    throw ValidationError("frame dimension " + std::to_string(frame.size()) +
                          " does not match model dimension " + std::to_string(dim));
  return h.states[state].log_likelihood(frame);
}

void GlobalStats::accumulate(const FeatureMatrix& f) {
  if (dim == 0) {
    dim = f.dim;
    sum.assign(dim, 0.0);
    sumsq.assign(dim, 0.0);
  }
  if (f.dim != dim) throw ValidationError("feature dimension mismatch in global stats");
  for (int32_t t = 0; t < f.num_frames; ++t) {
    auto row = f.frame(t);
    for (int d = 0; d < dim; ++d) {
      sum[d] += row[d];
      sumsq[d] += static_cast<double>(row[d]) * row[d];
    }
  }
  count += f.num_frames;
}

std::vector<double> GlobalStats::mean() const {
  std::vector<double> m(dim, 0.0);
  if (count > 0)
    for (int d = 0; d < dim; ++d) m[d] = sum[d] / count;
  return m;
}

std::vector<double> GlobalStats::var(double floor) const {
  std::vector<double> v(dim, 1.0);
  if (count > 0) {
    auto m = mean();
    for (int d = 0; d < dim; ++d) v[d] = std::max(floor, sumsq[d] / count - m[d] * m[d]);
  }
  return v;
}

AcousticModel flat_start(const std::vector<std::string>& units, const FlatStartConfig& config,
                         const GlobalStats* stats) {
  std::set<std::string> seen;
  for (const auto& u : units)
    if (!seen.insert(u).second) throw ValidationError("duplicate unit \"" + u + "\" in flat start");
  if (units.empty()) throw ValidationError("flat start needs at least one unit");

  std::vector<double> mean(config.dim, 0.0), var(config.dim, 1.0);
  if (stats && stats->count > 0) {
    if (stats->dim != config.dim) throw ValidationError("global stats dimension mismatch");
    mean = stats->mean();
    var = stats->var(config.variance_floor);
  }

  AcousticModel am;
  am.dim = config.dim;
  am.states_per_unit = config.states;
  std::vector<std::string> sorted(seen.begin(), seen.end());
  for (const auto& u : sorted) {
    PhoneHmm h;
    h.unit = u;
    h.log_self.assign(config.states, std::log(0.5));
    h.log_forward.assign(config.states, std::log(0.5));
    for (int s = 0; s < config.states; ++s) {
      DiagGmm g;
      g.dim = config.dim;
      g.weights = {1.0};
      g.means = {mean};
      g.vars = {var};
      g.refresh_gconsts();
      h.states.push_back(std::move(g));
    }
    am.unit_index[u] = static_cast<int>(am.hmms.size());
    am.hmms.push_back(std::move(h));
  }
  return am;
}

// ---------------------------------------------------------------------------
// Binary model file, magic "AMDLv1". Doubles are written raw (LE host).
// ---------------------------------------------------------------------------

static const char kModelMagic[6] = {'A', 'M', 'D', 'L', 'v', '1'};

template <typename T>
static void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <typename T>
static T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw ParseError("truncated acoustic model file");
  return v;
}

static void put_string(std::ostream& out, const std::string& s) {
  put<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
static std::string get_string(std::istream& in) {
  uint32_t n = get<uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ParseError("truncated acoustic model file");
  return s;
}

static void put_vec(std::ostream& out, const std::vector<double>& v) {
  put<uint32_t>(out, static_cast<uint32_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}
static std::vector<double> get_vec(std::istream& in) {
  uint32_t n = get<uint32_t>(in);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ParseError("truncated acoustic model file");
  return v;
}

void write_acoustic_model(const AcousticModel& am, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write acoustic model: " + path);
  out.write(kModelMagic, sizeof(kModelMagic));
  put<int32_t>(out, am.dim);
  put<int32_t>(out, am.states_per_unit);
  put<uint32_t>(out, static_cast<uint32_t>(am.hmms.size()));
  for (const auto& h : am.hmms) {
    put_string(out, h.unit);
    put_vec(out, h.log_self);
    put_vec(out, h.log_forward);
    put<uint32_t>(out, static_cast<uint32_t>(h.states.size()));
    for (const auto& g : h.states) {
      put<int32_t>(out, g.dim);
      put_vec(out, g.weights);
      put<uint32_t>(out, static_cast<uint32_t>(g.means.size()));
      for (size_t c = 0; c < g.means.size(); ++c) {
        put_vec(out, g.means[c]);
        put_vec(out, g.vars[c]);
      }
    }
  }
  if (!out) throw ValidationError("write failed for acoustic model: " + path);
}

AcousticModel read_acoustic_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open acoustic model: " + path);
  char magic[6];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(kModelMagic)) != 0)
    throw ParseError("not an AMDLv1 model file: " + path);
  AcousticModel am;
  am.dim = get<int32_t>(in);
  am.states_per_unit = get<int32_t>(in);
  uint32_t n_hmms = get<uint32_t>(in);
  for (uint32_t i = 0; i < n_hmms; ++i) {
    PhoneHmm h;
    h.unit = get_string(in);
    h.log_self = get_vec(in);
    h.log_forward = get_vec(in);
    uint32_t n_states = get<uint32_t>(in);
    for (uint32_t s = 0; s < n_states; ++s) {
      DiagGmm g;
      g.dim = get<int32_t>(in);
      g.weights = get_vec(in);
      uint32_t n_comp = get<uint32_t>(in);
      for (uint32_t c = 0; c < n_comp; ++c) {
        g.means.push_back(get_vec(in));
        g.vars.push_back(get_vec(in));
      }
      g.refresh_gconsts();
      h.states.push_back(std::move(g));
    }
    am.unit_index[h.unit] = static_cast<int>(am.hmms.size());
    am.hmms.push_back(std::move(h));
  }
  return am;
}

}  // namespace accentasr

#include "accentasr/train_am.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace accentasr {

AcousticModel mixture_split(const AcousticModel& am) {
  AcousticModel out = am;
  for (auto& h : out.hmms) {
    for (auto& g : h.states) {
      DiagGmm split;
      split.dim = g.dim;
      for (int c = 0; c < g.num_components(); ++c) {
        std::vector<double> up = g.means[c], down = g.means[c];
        for (int d = 0; d < g.dim; ++d) {
          double step = 0.2 * std::sqrt(g.vars[c][d]);
          up[d] += step;
          down[d] -= step;
        }
        split.weights.push_back(g.weights[c] * 0.5);
        split.means.push_back(std::move(up));
        split.vars.push_back(g.vars[c]);
        split.weights.push_back(g.weights[c] * 0.5);
        split.means.push_back(std::move(down));
        split.vars.push_back(g.vars[c]);
      }
      split.refresh_gconsts();
      g = std::move(split);
    }
  }
  return out;
}

namespace {

// Per-frame view of one aligned utterance; enough for accumulation
// without keeping the graph around.
struct AlignSummary {
  double loglik = 0.0;
  std::vector<int32_t> density;   // per frame
  std::vector<uint8_t> stays;     // frame t stays in the same graph state at t+1
};

struct StateAccumulator {
  std::vector<double> occupancy;
  std::vector<std::vector<double>> sum;
  std::vector<std::vector<double>> sumsq;
  double self_count = 0.0;
  double forward_count = 0.0;

  void resize(int components, int dim) {
    occupancy.assign(components, 0.0);
    sum.assign(components, std::vector<double>(dim, 0.0));
    sumsq.assign(components, std::vector<double>(dim, 0.0));
    self_count = forward_count = 0.0;
  }
};

}  // namespace

AcousticModel train_em(const AcousticModel& init, const std::vector<TrainUtterance>& corpus,
                       const TrainConfig& config, TrainStats* stats) {
  if (config.iterations < 1) throw ValidationError("training needs at least one iteration");
  if (corpus.empty()) throw ValidationError("training corpus is empty");

  AcousticModel model = init;
  TrainStats local_stats;
  TrainStats& st = stats ? *stats : local_stats;

  const int n_utts = static_cast<int>(corpus.size());
  std::vector<AlignSummary> summaries(corpus.size());
  std::vector<double> post;

  for (int iter = 1; iter <= config.iterations; ++iter) {
    bool split_now = std::find(config.mixup_iterations.begin(), config.mixup_iterations.end(),
                               iter) != config.mixup_iterations.end();
    if (split_now) model = mixture_split(model);

    // Alignment pass: the data-parallel kernel.
    auto align_one = [&](int i) {
      auto slots = transcript_slots(model, corpus[i].words, config.optional_silence,
                                    config.silence_logprob);
      auto graph = build_utterance_graph(model, slots);
      Alignment a = viterbi_align(model, graph, *corpus[i].feats);
      AlignSummary& s = summaries[i];
      const int T = static_cast<int>(a.state_seq.size());
      s.loglik = a.log_likelihood;
      s.density.resize(T);
      s.stays.assign(T, 0);
      for (int t = 0; t < T; ++t) {
        s.density[t] = graph.states[a.state_seq[t]].density;
        if (t + 1 < T && a.state_seq[t + 1] == a.state_seq[t]) s.stays[t] = 1;
      }
    };
    if (config.parallel) {
#pragma omp parallel for schedule(dynamic, 8)
      for (int i = 0; i < n_utts; ++i) align_one(i);
    } else {
      for (int i = 0; i < n_utts; ++i) align_one(i);
    }

    KahanSum total;
    for (const auto& s : summaries) total.add(s.loglik);
    double loglik = total.value();

    if (!st.iteration_loglik.empty() && (st.comparable.empty() || st.comparable.back()) &&
        !split_now) {
      double prev = st.iteration_loglik.back();
      if (loglik < prev - 1e-6)
        throw std::runtime_error("EM aligned log likelihood decreased at iteration " +
                                 std::to_string(iter) + ": " + std::to_string(prev) + " -> " +
                                 std::to_string(loglik));
    }
    st.iteration_loglik.push_back(loglik);
    st.iteration_densities.push_back(model.total_densities());
    st.comparable.push_back(!split_now);

    // Accumulation in utterance order keeps runs bit-identical no matter
    // how the alignment loop was scheduled.
    std::vector<StateAccumulator> accs(model.hmms.size() *
                                       static_cast<size_t>(model.states_per_unit));
    for (size_t k = 0; k < accs.size(); ++k) {
      const PhoneHmm& h = model.hmms[k / model.states_per_unit];
      accs[k].resize(h.states[k % model.states_per_unit].num_components(), model.dim);
    }
    for (int i = 0; i < n_utts; ++i) {
      const FeatureMatrix& feats = *corpus[i].feats;
      const AlignSummary& s = summaries[i];
      for (int t = 0; t < feats.num_frames; ++t) {
        StateAccumulator& acc = accs[s.density[t]];
        const DiagGmm& g =
            model.hmms[s.density[t] / model.states_per_unit].states[s.density[t] %
                                                                    model.states_per_unit];
        auto frame = feats.frame(t);
        g.component_posteriors(frame, post);
        for (int c = 0; c < g.num_components(); ++c) {
          if (post[c] <= 0.0) continue;
          acc.occupancy[c] += post[c];
          for (int d = 0; d < model.dim; ++d) {
            acc.sum[c][d] += post[c] * frame[d];
            acc.sumsq[c][d] += post[c] * static_cast<double>(frame[d]) * frame[d];
          }
        }
        if (s.stays[t])
          acc.self_count += 1.0;
        else
          acc.forward_count += 1.0;  // any departure uses the forward arc
      }
    }

    // Update.
    for (size_t u = 0; u < model.hmms.size(); ++u) {
      PhoneHmm& h = model.hmms[u];
      bool unit_seen = false;
      for (int s = 0; s < h.num_states(); ++s) {
        StateAccumulator& acc = accs[model.density_id(static_cast<int>(u), s)];
        double occ = 0.0;
        for (double o : acc.occupancy) occ += o;
        if (occ <= 0.0) {
          st.frozen_state_updates++;
          continue;
        }
        unit_seen = true;
        DiagGmm& g = h.states[s];
        for (int c = 0; c < g.num_components(); ++c) {
          if (acc.occupancy[c] <= 0.0) {
            g.weights[c] = config.min_component_weight;
            continue;
          }
          g.weights[c] = std::max(acc.occupancy[c] / occ, config.min_component_weight);
          for (int d = 0; d < model.dim; ++d) {
            double mean = acc.sum[c][d] / acc.occupancy[c];
            g.means[c][d] = mean;
            g.vars[c][d] =
                std::max(config.variance_floor, acc.sumsq[c][d] / acc.occupancy[c] - mean * mean);
          }
        }
        g.refresh_gconsts();
        double n = acc.self_count + acc.forward_count;
        if (n > 0.0) {
          double p_self = std::max(acc.self_count / n, config.min_transition_prob);
          double p_fwd = std::max(acc.forward_count / n, config.min_transition_prob);
          h.log_self[s] = std::log(p_self);
          h.log_forward[s] = std::log(p_fwd);
        }
      }
      if (!unit_seen)
        st.warnings.push_back("unit \"" + h.unit + "\" has zero aligned frames; parameters frozen");
    }
  }
  return model;
}

}  // namespace accentasr

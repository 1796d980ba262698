#include "accentasr/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace accentasr {

UtteranceGraph build_utterance_graph(const AcousticModel& am, const std::vector<GraphSlot>& slots) {
  UtteranceGraph g;
  // Frontier: states whose exit can reach the next slot, with the logprob
  // of leaving them. state -1 is the virtual start.
  std::vector<std::pair<int, double>> frontier = {{-1, 0.0}};
  g.min_frames = 0;

  for (size_t si = 0; si < slots.size(); ++si) {
    const GraphSlot& slot = slots[si];
    if (slot.alts.empty()) throw ValidationError("utterance graph slot has no alternatives");
    std::vector<std::pair<int, double>> exits;
    int slot_min = std::numeric_limits<int>::max();
    for (size_t ai = 0; ai < slot.alts.size(); ++ai) {
      const PronChain& chain = slot.alts[ai];
      if (chain.unit_indices.empty())
        throw ValidationError("utterance graph alternative has no units");
      int chain_states = 0;
      int prev_last = -2;  // last state of the previous unit in this chain
      for (size_t ui = 0; ui < chain.unit_indices.size(); ++ui) {
        const PhoneHmm& hmm = am.hmm(chain.unit_indices[ui]);
        const int S = hmm.num_states();
        chain_states += S;
        for (int s = 0; s < S; ++s) {
          UtteranceGraph::StateInfo info;
          info.unit = chain.unit_indices[ui];
          info.state = s;
          info.slot = static_cast<int>(si);
          info.alt = static_cast<int>(ai);
          info.chain_pos = static_cast<int>(ui);
          info.density = am.density_id(chain.unit_indices[ui], s);
          int idx = static_cast<int>(g.states.size());
          g.states.push_back(info);
          g.entry_logprob.push_back(kLogZero);
          g.exit_logprob.push_back(kLogZero);
          g.self_logprob.push_back(hmm.log_self[s]);
          g.in_arcs.emplace_back();
          if (s > 0) {
            g.in_arcs[idx].emplace_back(idx - 1, hmm.log_forward[s - 1]);
          } else if (ui > 0) {
            const PhoneHmm& prev_hmm = am.hmm(chain.unit_indices[ui - 1]);
            g.in_arcs[idx].emplace_back(prev_last, prev_hmm.log_forward.back());
          } else {
            // chain entry: connect from the frontier
            for (const auto& [src, leave] : frontier) {
              if (src < 0)
                g.entry_logprob[idx] = std::max(g.entry_logprob[idx], leave + slot.entry_logprob);
              else
                g.in_arcs[idx].emplace_back(src, leave + slot.entry_logprob);
            }
          }
          if (s == S - 1 && ui + 1 == chain.unit_indices.size())
            exits.emplace_back(idx, hmm.log_forward[s]);
          if (s == S - 1) prev_last = idx;
        }
      }
      slot_min = std::min(slot_min, chain_states);
    }
    if (slot.optional) {
      exits.insert(exits.end(), frontier.begin(), frontier.end());
    } else {
      g.min_frames += slot_min;
    }
    frontier = std::move(exits);
  }

  for (const auto& [src, leave] : frontier) {
    if (src < 0)
      g.start_can_finish = true;
    else
      g.exit_logprob[src] = leave;
  }
  return g;
}

std::vector<GraphSlot> transcript_slots(const AcousticModel& am,
                                        const std::vector<const LexiconEntry*>& words,
                                        bool optional_silence, double silence_logprob) {
  const int sil = optional_silence ? am.index_of(kSilenceUnit) : -1;
  auto silence_slot = [&]() {
    GraphSlot s;
    s.optional = true;
    s.entry_logprob = silence_logprob;
    PronChain chain;
    chain.unit_indices = {sil};
    chain.word_index = -1;
    s.alts.push_back(std::move(chain));
    return s;
  };

  std::vector<GraphSlot> slots;
  if (optional_silence) slots.push_back(silence_slot());
  for (size_t i = 0; i < words.size(); ++i) {
    GraphSlot s;
    PronChain chain;
    chain.word_index = static_cast<int>(i);
    chain.unit_indices.reserve(words[i]->pron.size());
    for (const auto& g : words[i]->pron) chain.unit_indices.push_back(am.index_of(g.str()));
    s.alts.push_back(std::move(chain));
    slots.push_back(std::move(s));
    if (optional_silence) slots.push_back(silence_slot());
  }
  return slots;
}

EmissionTable::EmissionTable(const AcousticModel& am, const FeatureMatrix& feats)
    : am_(am), feats_(feats) {
  size_t n = am.hmms.size() * static_cast<size_t>(am.states_per_unit);
  rows_.resize(n);
  ready_.assign(n, 0);
}

double EmissionTable::at(int density, int t) const {
  if (!ready_[density]) {
    const PhoneHmm& h = am_.hmms[density / am_.states_per_unit];
    const DiagGmm& g = h.states[density % am_.states_per_unit];
    auto& row = rows_[density];
    row.resize(feats_.num_frames);
    for (int32_t f = 0; f < feats_.num_frames; ++f) row[f] = g.log_likelihood(feats_.frame(f));
    ready_[density] = 1;
  }
  return rows_[density][t];
}

Alignment viterbi_align(const AcousticModel& am, const UtteranceGraph& graph,
                        const FeatureMatrix& feats) {
  EmissionTable emissions(am, feats);
  return viterbi_align(am, graph, feats, emissions);
}

Alignment viterbi_align(const AcousticModel& am, const UtteranceGraph& graph,
                        const FeatureMatrix& feats, const EmissionTable& emissions) {
  const int T = feats.num_frames;
  const int S = static_cast<int>(graph.states.size());
  if (T < 1) throw ValidationError("cannot align an empty feature matrix");
  if (feats.dim != am.dim)
    throw ValidationError("feature dimension " + std::to_string(feats.dim) +
                          " does not match model dimension " + std::to_string(am.dim));
  if (T < graph.min_frames)
    throw AlignmentError("alignment infeasible: " + std::to_string(T) + " frames but " +
                         std::to_string(graph.min_frames) + " mandatory states");

  std::vector<double> prev(S, kLogZero), cur(S, kLogZero);
  std::vector<int32_t> psi(static_cast<size_t>(T) * S, -1);

  for (int u = 0; u < S; ++u) {
    if (graph.entry_logprob[u] != kLogZero)
      prev[u] = graph.entry_logprob[u] + emissions.at(graph.states[u].density, 0);
  }
  for (int t = 1; t < T; ++t) {
    int32_t* bp = psi.data() + static_cast<size_t>(t) * S;
    for (int u = 0; u < S; ++u) {
      double best = prev[u] + graph.self_logprob[u];
      int32_t arg = u;
      for (const auto& [src, lp] : graph.in_arcs[u]) {
        double cand = prev[src] + lp;
        if (cand > best) {
          best = cand;
          arg = src;
        }
      }
      if (best == kLogZero) {
        cur[u] = kLogZero;
        bp[u] = -1;
      } else {
        cur[u] = best + emissions.at(graph.states[u].density, t);
        bp[u] = arg;
      }
    }
    std::swap(prev, cur);
  }

  double best = kLogZero;
  int best_state = -1;
  for (int u = 0; u < S; ++u) {
    if (graph.exit_logprob[u] == kLogZero || prev[u] == kLogZero) continue;
    double cand = prev[u] + graph.exit_logprob[u];
    if (cand > best) {
      best = cand;
      best_state = u;
    }
  }
  if (best_state < 0) throw AlignmentError("alignment infeasible: no complete state path");

  Alignment out;
  out.log_likelihood = best;
  out.state_seq.resize(T);
  int u = best_state;
  for (int t = T - 1; t >= 0; --t) {
    out.state_seq[t] = u;
    if (t > 0) u = psi[static_cast<size_t>(t) * S + u];
  }

  // Phone runs: group frames by (slot, alt, chain_pos).
  for (int t = 0; t < T; ++t) {
    const auto& info = graph.states[out.state_seq[t]];
    if (!out.phones.empty()) {
      auto& last = out.phones.back();
      const auto& linfo = graph.states[out.state_seq[t - 1]];
      if (linfo.slot == info.slot && linfo.alt == info.alt && linfo.chain_pos == info.chain_pos) {
        last.end = t;
        continue;
      }
    }
    out.phones.push_back({info.unit, t, t, info.slot, info.alt});
  }
  int last_slot = -1;
  for (const auto& p : out.phones) {
    if (p.slot != last_slot) {
      out.chosen.emplace_back(p.slot, p.alt);
      last_slot = p.slot;
    }
  }
  return out;
}

double forward_loglik(const AcousticModel& am, const UtteranceGraph& graph,
                      const FeatureMatrix& feats) {
  const int T = feats.num_frames;
  const int S = static_cast<int>(graph.states.size());
  EmissionTable emissions(am, feats);
  std::vector<double> prev(S, kLogZero), cur(S, kLogZero);
  for (int u = 0; u < S; ++u)
    if (graph.entry_logprob[u] != kLogZero)
      prev[u] = graph.entry_logprob[u] + emissions.at(graph.states[u].density, 0);
  for (int t = 1; t < T; ++t) {
    for (int u = 0; u < S; ++u) {
      double acc = prev[u] + graph.self_logprob[u];
      for (const auto& [src, lp] : graph.in_arcs[u]) acc = log_sum_exp(acc, prev[src] + lp);
      cur[u] = acc == kLogZero ? kLogZero : acc + emissions.at(graph.states[u].density, t);
    }
    std::swap(prev, cur);
  }
  double total = kLogZero;
  for (int u = 0; u < S; ++u)
    if (graph.exit_logprob[u] != kLogZero && prev[u] != kLogZero)
      total = log_sum_exp(total, prev[u] + graph.exit_logprob[u]);
  if (total == kLogZero) throw AlignmentError("no complete path in forward pass");
  return total;
}

Alignment align(const AcousticModel& am, const std::vector<const LexiconEntry*>& words,
                const FeatureMatrix& feats, bool optional_silence, double silence_logprob) {
  if (words.empty() && !optional_silence)
    throw ValidationError("cannot align an empty transcript without optional silence");
  auto slots = transcript_slots(am, words, optional_silence, silence_logprob);
  auto graph = build_utterance_graph(am, slots);
  return viterbi_align(am, graph, feats);
}

}  // namespace accentasr

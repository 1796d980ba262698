#include "accentasr/decoder.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace accentasr {

namespace {

struct HistTable {
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  std::unordered_map<uint64_t, int32_t> index;

  int32_t intern(uint32_t a, uint32_t b) {
    uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int32_t id = static_cast<int32_t>(pairs.size());
    pairs.emplace_back(a, b);
    index.emplace(key, id);
    return id;
  }
};

struct ArenaEntry {
  int32_t prev = -1;
  int32_t frame = 0;
  int32_t unit = -1;        // phone-entry event
  int32_t word_entry = -1;  // >= 0: word completion event (entry index)
};

struct Token {
  double score;
  int32_t node;
  int32_t state;
  int32_t hist;
  int32_t arena;
};

inline uint64_t token_key(int32_t node, int32_t state, int32_t hist) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(hist)) << 23) |
         (static_cast<uint64_t>(static_cast<uint32_t>(node)) << 3) |
         static_cast<uint64_t>(static_cast<uint32_t>(state));
}

}  // namespace

static void validate_decode_spec(const AcousticModel& am, const DecodeGraphSpec& spec) {
  if (!spec.lexicon || !spec.lm) throw ValidationError("decode spec needs a lexicon and an LM");
  if (spec.lexicon->kind != LexiconKind::kMonoJointDecode &&
      spec.lexicon->kind != LexiconKind::kMultiJointDecode)
    throw ValidationError("decoding lexicon must be mono_joint_decode or multi_joint_decode");
  bool tagged = spec.lm->tagged_vocabulary();
  if (spec.lexicon->kind == LexiconKind::kMultiJointDecode && !tagged)
    throw ValidationError("multi-joint lexicon requires an accent-tagged LM vocabulary");
  if (spec.lexicon->kind == LexiconKind::kMonoJointDecode && tagged)
    throw ValidationError("mono-joint lexicon requires an untagged LM vocabulary");
  if (spec.optional_silence && !am.has_unit(kSilenceUnit))
    throw ValidationError("optional silence requested but the model has no \"" + kSilenceUnit +
                          "\" unit");
}

Decoder::Decoder(const AcousticModel& am, const DecodeGraphSpec& spec) : am_(am), spec_(spec) {
  validate_decode_spec(am, spec);
  build_tree();
}

void Decoder::build_tree() {
  nodes_.push_back(TreeNode{});  // virtual root
  std::unordered_map<uint64_t, int> arc_index;  // (parent, unit) -> child

  std::unordered_map<std::string, int> prons_seen;
  for (const auto& e : spec_.lexicon->entries) {
    EntryInfo info;
    info.entry = &e;
    info.lm_id = spec_.lm->vocab().find_or_unk(e.word);
    info.pron_index = prons_seen[e.word]++;
    info.accent = e.pron.empty() ? std::string() : e.pron.front().accent;

    int node = 0;
    for (const auto& g : e.pron) {
      int unit = am_.index_of(g.str());
      uint64_t key = (static_cast<uint64_t>(node) << 24) | static_cast<uint32_t>(unit);
      auto it = arc_index.find(key);
      if (it == arc_index.end()) {
        int child = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{unit, {}, {}});
        nodes_[node].children.push_back(child);
        arc_index.emplace(key, child);
        node = child;
      } else {
        node = it->second;
      }
    }
    nodes_[node].completions.push_back(static_cast<int>(entries_.size()));
    entries_.push_back(std::move(info));
  }

  for (auto& n : nodes_) {
    std::sort(n.children.begin(), n.children.end(),
              [&](int a, int b) { return nodes_[a].unit < nodes_[b].unit; });
    std::sort(n.completions.begin(), n.completions.end(), [&](int a, int b) {
      const EntryInfo& ea = entries_[a];
      const EntryInfo& eb = entries_[b];
      if (ea.entry->word != eb.entry->word) return ea.entry->word < eb.entry->word;
      return ea.pron_index < eb.pron_index;
    });
  }

  if (spec_.optional_silence) {
    sil_unit_ = am_.index_of(kSilenceUnit);
    sil_node_ = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{sil_unit_, {}, {}});
  }
}

DecodeResult Decoder::decode(const FeatureMatrix& feats, const DecodeOptions& opts) const {
  const int T = feats.num_frames;
  if (T < 1) throw ValidationError("cannot decode an empty feature matrix");
  if (feats.dim != am_.dim)
    throw ValidationError("feature dimension " + std::to_string(feats.dim) +
                          " does not match model dimension " + std::to_string(am_.dim));
  if (!(opts.beam > 0.0)) throw ValidationError("beam must be positive");
  if (opts.max_active < 1) throw ValidationError("max_active must be at least 1");

  EmissionTable emissions(am_, feats);
  HistTable hists;
  const int32_t init_hist = hists.intern(Vocab::kNone, Vocab::kBos);

  std::vector<ArenaEntry> arena;
  arena.reserve(4096);

  const double lm_mult = spec_.lm_scale * kLn10;
  const double wip = spec_.word_insertion_penalty;
  // The total score carries the LM scaled up rather than the acoustics
  // scaled down, so a conventional beam (e.g. 14 with lm_scale 10) is
  // normalized back into this domain.
  const double beam = opts.beam * std::max(1.0, spec_.lm_scale);

  std::vector<Token> cur, next;
  std::unordered_map<uint64_t, int32_t> slot;  // token_key -> index into next
  double running_best = kLogZero;

  auto push_token = [&](int32_t node, int32_t state, int32_t hist, double score, int32_t arena_idx) {
    if (score < running_best - beam) return;
    if (score > running_best) running_best = score;
    uint64_t key = token_key(node, state, hist);
    auto it = slot.find(key);
    if (it == slot.end()) {
      slot.emplace(key, static_cast<int32_t>(next.size()));
      next.push_back({score, node, state, hist, arena_idx});
    } else if (score > next[it->second].score) {
      next[it->second] = {score, node, state, hist, arena_idx};
    }
  };

  auto enter_phone = [&](int32_t node, int32_t hist, double base_score, int32_t prev_arena, int t) {
    const TreeNode& n = nodes_[node];
    double score = base_score + emissions.at(am_.density_id(n.unit, 0), t);
    if (score < running_best - beam) return;
    int32_t idx = static_cast<int32_t>(arena.size());
    arena.push_back({prev_arena, t, n.unit, -1});
    push_token(node, 0, hist, score, idx);
  };

  // Expansion from a word boundary: next word's first phones and
  // optionally silence, both consuming frame t.
  auto boundary_expand = [&](int32_t hist, double score, int32_t arena_idx, int t) {
    for (int child : nodes_[0].children) enter_phone(child, hist, score, arena_idx, t);
    if (sil_node_ >= 0) enter_phone(sil_node_, hist, score + spec_.silence_logprob, arena_idx, t);
  };

  // Word-boundary recombination candidates within one frame step.
  struct BoundaryCand {
    double score = kLogZero;
    int32_t arena = -1;
    int32_t entry = -1;  // -1 for a silence exit
  };

  auto traceback_entries = [&](int32_t arena_idx) {
    std::vector<int> out;
    for (int32_t i = arena_idx; i >= 0; i = arena[i].prev)
      if (arena[i].word_entry >= 0) out.push_back(arena[i].word_entry);
    std::reverse(out.begin(), out.end());
    return out;
  };
  auto entry_seq_less = [&](const std::vector<int>& a, const std::vector<int>& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
      const EntryInfo& ea = entries_[a[i]];
      const EntryInfo& eb = entries_[b[i]];
      if (ea.entry->word != eb.entry->word) return ea.entry->word < eb.entry->word;
      if (ea.pron_index != eb.pron_index) return ea.pron_index < eb.pron_index;
    }
    return a.size() < b.size();
  };
  auto boundary_better = [&](const BoundaryCand& cand, const BoundaryCand& incumbent) {
    if (cand.score != incumbent.score) return cand.score > incumbent.score;
    // Equal score: lexicographic on (word string, pronunciation index);
    // a silence exit carries no new word and sorts first.
    if (cand.entry < 0 || incumbent.entry < 0) return cand.entry < incumbent.entry;
    const EntryInfo& a = entries_[cand.entry];
    const EntryInfo& b = entries_[incumbent.entry];
    if (a.entry->word != b.entry->word) return a.entry->word < b.entry->word;
    return a.pron_index < b.pron_index;
  };

  // t = 0 seeding.
  boundary_expand(init_hist, 0.0, -1, 0);
  if (next.empty()) throw NoPathError("no startable hypothesis at frame 0");

  auto prune = [&]() {
    double best = kLogZero;
    for (const auto& tok : next) best = std::max(best, tok.score);
    double threshold = best - beam;
    cur.clear();
    for (const auto& tok : next)
      if (tok.score >= threshold) cur.push_back(tok);
    if (static_cast<int>(cur.size()) > opts.max_active) {
      std::sort(cur.begin(), cur.end(), [](const Token& a, const Token& b) {
        if (a.score != b.score) return a.score > b.score;
        return token_key(a.node, a.state, a.hist) < token_key(b.node, b.state, b.hist);
      });
      cur.resize(opts.max_active);
    }
    // Canonical order keeps history interning deterministic.
    std::sort(cur.begin(), cur.end(), [](const Token& a, const Token& b) {
      return token_key(a.node, a.state, a.hist) < token_key(b.node, b.state, b.hist);
    });
    next.clear();
    slot.clear();
    running_best = kLogZero;
  };
  prune();

  BoundaryCand final_best;
  std::vector<int> final_words;

  auto offer_final = [&](double score, int32_t arena_idx, int32_t entry) {
    BoundaryCand cand{score, arena_idx, entry};
    if (final_best.arena < 0 && final_best.score == kLogZero) {
      final_best = cand;
      final_words = traceback_entries(arena_idx);
      return;
    }
    if (cand.score > final_best.score) {
      final_best = cand;
      final_words = traceback_entries(arena_idx);
    } else if (cand.score == final_best.score) {
      auto words = traceback_entries(arena_idx);
      if (entry_seq_less(words, final_words)) {
        final_best = cand;
        final_words = std::move(words);
      }
    }
  };

  for (int t = 0; t < T; ++t) {
    const bool last = (t + 1 == T);
    std::map<int32_t, BoundaryCand> exits;  // new hist -> best boundary candidate

    for (const auto& tok : cur) {
      const TreeNode& n = nodes_[tok.node];
      const PhoneHmm& hmm = am_.hmms[n.unit];
      const int S = hmm.num_states();

      if (!last) {
        push_token(tok.node, tok.state, tok.hist,
                   tok.score + hmm.log_self[tok.state] +
                       emissions.at(am_.density_id(n.unit, tok.state), t + 1),
                   tok.arena);
        if (tok.state + 1 < S)
          push_token(tok.node, tok.state + 1, tok.hist,
                     tok.score + hmm.log_forward[tok.state] +
                         emissions.at(am_.density_id(n.unit, tok.state + 1), t + 1),
                     tok.arena);
      }
      if (tok.state != S - 1) continue;
      const double exit_score = tok.score + hmm.log_forward[S - 1];

      if (tok.node == sil_node_) {
        // Silence preserves the LM history and the word sequence.
        if (last) {
          auto [h1, h2] = hists.pairs[tok.hist];
          offer_final(exit_score + lm_mult * spec_.lm->cond_logprob(h1, h2, Vocab::kEos),
                      tok.arena, -1);
        } else {
          BoundaryCand cand{exit_score, tok.arena, -1};
          auto [it, inserted] = exits.emplace(tok.hist, cand);
          if (!inserted && boundary_better(cand, it->second)) it->second = cand;
        }
        continue;
      }

      if (!last) {
        for (int child : n.children)
          enter_phone(child, tok.hist, exit_score, tok.arena, t + 1);
      }
      for (int ei : n.completions) {
        const EntryInfo& entry = entries_[ei];
        auto [h1, h2] = hists.pairs[tok.hist];
        double word_score =
            exit_score + lm_mult * spec_.lm->cond_logprob(h1, h2, entry.lm_id) + wip;
        int32_t marker = static_cast<int32_t>(arena.size());
        arena.push_back({tok.arena, t, -1, ei});
        if (last) {
          double eos = lm_mult * spec_.lm->cond_logprob(h2, entry.lm_id, Vocab::kEos);
          offer_final(word_score + eos, marker, ei);
        } else {
          int32_t new_hist = hists.intern(h2, entry.lm_id);
          BoundaryCand cand{word_score, marker, ei};
          auto [it, inserted] = exits.emplace(new_hist, cand);
          if (!inserted && boundary_better(cand, it->second)) it->second = cand;
        }
      }
    }

    if (!last) {
      for (const auto& [hist, cand] : exits) boundary_expand(hist, cand.score, cand.arena, t + 1);
      if (next.empty())
        throw NoPathError("all hypotheses pruned at frame " + std::to_string(t + 1) +
                          " (beam too tight)");
      prune();
    }
  }

  if (final_best.score == kLogZero)
    throw NoPathError("no hypothesis reached the final frame at a word boundary");

  DecodeResult result;
  result.utterance_id = feats.utterance_id;
  result.mode = spec_.lexicon->kind;
  result.total_log_score = final_best.score;

  // Traceback: phone entries and word markers in chronological order.
  std::vector<int32_t> chain;
  for (int32_t i = final_best.arena; i >= 0; i = arena[i].prev) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());

  std::vector<PhoneSpan> phones;
  for (int32_t idx : chain) {
    const ArenaEntry& ev = arena[idx];
    if (ev.word_entry >= 0) {
      const EntryInfo& entry = entries_[ev.word_entry];
      int len = static_cast<int>(entry.entry->pron.size());
      int word_index = static_cast<int>(result.words.size());
      int first = static_cast<int>(phones.size()) - len;
      if (first < 0) throw std::logic_error("decoder traceback shorter than pronunciation");
      for (int k = 0; k < len; ++k) {
        if (phones[first + k].unit != entry.entry->pron[k].str())
          throw std::logic_error("decoder traceback does not match the winning pronunciation");
        phones[first + k].word_index = word_index;
      }
      result.words.push_back(entry.entry->word);
      result.word_accents.push_back(entry.accent);
      result.pron_indices.push_back(entry.pron_index);
    } else {
      if (!phones.empty()) phones.back().end = ev.frame - 1;
      phones.push_back({am_.hmms[ev.unit].unit, ev.frame, T - 1, -1});
    }
  }
  result.phones = std::move(phones);
  return result;
}

DecodeResult decode(const AcousticModel& am, const DecodeGraphSpec& spec,
                    const FeatureMatrix& feats, const DecodeOptions& opts) {
  Decoder decoder(am, spec);
  return decoder.decode(feats, opts);
}

std::vector<DecodeResult> decode_batch(const AcousticModel& am, const DecodeGraphSpec& spec,
                                       const std::vector<FeatureMatrix>& feats,
                                       const DecodeOptions& opts) {
  Decoder decoder(am, spec);
  std::vector<DecodeResult> results(feats.size());
  std::exception_ptr error;
  const int n = static_cast<int>(feats.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i) {
    try {
      results[i] = decoder.decode(feats[i], opts);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return results;
}

std::vector<DecodeResult> decode_batch_serial(const AcousticModel& am, const DecodeGraphSpec& spec,
                                              const std::vector<FeatureMatrix>& feats,
                                              const DecodeOptions& opts) {
  Decoder decoder(am, spec);
  std::vector<DecodeResult> results;
  results.reserve(feats.size());
  for (const auto& f : feats) results.push_back(decoder.decode(f, opts));
  return results;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle
// ---------------------------------------------------------------------------

DecodeResult exhaustive_decode(const AcousticModel& am, const DecodeGraphSpec& spec,
                               const FeatureMatrix& feats, int max_words) {
  validate_decode_spec(am, spec);
  if (feats.num_frames < 1) throw ValidationError("cannot decode an empty feature matrix");

  // Collect distinct words with their pronunciations, in lexicographic order.
  std::map<std::string, std::vector<const LexiconEntry*>> words;
  for (const auto& e : spec.lexicon->entries) words[e.word].push_back(&e);
  if (words.size() > 8)
    throw ValidationError("exhaustive_decode refuses vocabularies over 8 words (got " +
                          std::to_string(words.size()) + ")");
  if (max_words > 4 || max_words < 0)
    throw ValidationError("exhaustive_decode refuses max_words > 4");

  std::vector<std::string> word_list;
  for (const auto& [w, _] : words) word_list.push_back(w);

  const double lm_mult = spec.lm_scale * kLn10;
  EmissionTable emissions(am, feats);

  struct Best {
    bool found = false;
    double score = kLogZero;
    std::vector<std::string> seq;
    Alignment alignment;
    std::vector<GraphSlot> slots;
  } best;

  std::vector<std::string> seq;
  auto try_sequence = [&]() {
    // LM part.
    uint32_t h1 = Vocab::kNone, h2 = Vocab::kBos;
    double lm_log = 0.0;
    for (const auto& w : seq) {
      uint32_t id = spec.lm->vocab().find_or_unk(w);
      lm_log += spec.lm->cond_logprob(h1, h2, id);
      h1 = h2;
      h2 = id;
    }
    lm_log += spec.lm->cond_logprob(h1, h2, Vocab::kEos);

    // Acoustic part: every pronunciation of each word in parallel, with
    // optional silence around words, exactly as the decoder composes it.
    std::vector<GraphSlot> slots;
    auto sil_slot = [&]() {
      GraphSlot s;
      s.optional = true;
      s.entry_logprob = spec.silence_logprob;
      PronChain chain;
      chain.unit_indices = {am.index_of(kSilenceUnit)};
      s.alts.push_back(std::move(chain));
      return s;
    };
    if (spec.optional_silence) slots.push_back(sil_slot());
    for (size_t i = 0; i < seq.size(); ++i) {
      GraphSlot s;
      const auto& prons = words.at(seq[i]);
      for (size_t p = 0; p < prons.size(); ++p) {
        PronChain chain;
        chain.word_index = static_cast<int>(i);
        chain.pron_index = static_cast<int>(p);
        for (const auto& g : prons[p]->pron) chain.unit_indices.push_back(am.index_of(g.str()));
        s.alts.push_back(std::move(chain));
      }
      slots.push_back(std::move(s));
      if (spec.optional_silence) slots.push_back(sil_slot());
    }
    if (slots.empty()) return;  // empty sequence without optional silence

    Alignment a;
    try {
      auto graph = build_utterance_graph(am, slots);
      a = viterbi_align(am, graph, feats, emissions);
    } catch (const AlignmentError&) {
      return;  // sequence cannot cover the frames
    }
    double total = a.log_likelihood + lm_mult * lm_log +
                   spec.word_insertion_penalty * static_cast<double>(seq.size());
    // Silence insertions already carried their penalty on the graph
    // entry arcs, so the alignment score includes them.
    if (!best.found || total > best.score) {
      best = {true, total, seq, std::move(a), std::move(slots)};
    }
  };

  // Depth-first enumeration in lexicographic order; ties keep the first.
  auto enumerate = [&](auto&& self, int depth) -> void {
    try_sequence();
    if (depth == max_words) return;
    for (const auto& w : word_list) {
      seq.push_back(w);
      self(self, depth + 1);
      seq.pop_back();
    }
  };
  enumerate(enumerate, 0);

  if (!best.found) throw NoPathError("exhaustive decode found no feasible word sequence");

  DecodeResult result;
  result.utterance_id = feats.utterance_id;
  result.mode = spec.lexicon->kind;
  result.total_log_score = best.score;
  result.words = best.seq;

  std::vector<int> slot_alt(best.slots.size(), -1);
  for (const auto& [slot, alt] : best.alignment.chosen) slot_alt[slot] = alt;
  for (const auto& p : best.alignment.phones) {
    const PronChain& chain = best.slots[p.slot].alts[p.alt];
    result.phones.push_back({am.hmms[p.unit].unit, p.start, p.end, chain.word_index});
  }
  for (size_t i = 0; i < best.seq.size(); ++i) {
    // Find the chosen pronunciation for word position i.
    const LexiconEntry* chosen = nullptr;
    int pron_index = 0;
    for (size_t s = 0; s < best.slots.size(); ++s) {
      if (slot_alt[s] < 0) continue;
      const PronChain& chain = best.slots[s].alts[slot_alt[s]];
      if (chain.word_index == static_cast<int>(i)) {
        chosen = words.at(best.seq[i])[chain.pron_index];
        pron_index = chain.pron_index;
        break;
      }
    }
    if (!chosen) throw std::logic_error("exhaustive decode lost a word slot");
    result.word_accents.push_back(chosen->pron.front().accent);
    result.pron_indices.push_back(pron_index);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Score breakdown
// ---------------------------------------------------------------------------

static double constrained_phone_loglik(const AcousticModel& am, int unit,
                                       const FeatureMatrix& feats, int start, int end) {
  const PhoneHmm& hmm = am.hmms[unit];
  const int S = hmm.num_states();
  const int d = end - start + 1;
  if (d < S)
    throw ValidationError("phone span of " + std::to_string(d) + " frames cannot fit " +
                          std::to_string(S) + " states");
  std::vector<double> delta(S, kLogZero), tmp(S);
  delta[0] = hmm.states[0].log_likelihood(feats.frame(start));
  for (int t = start + 1; t <= end; ++t) {
    for (int s = S - 1; s >= 0; --s) {
      double stay = delta[s] + hmm.log_self[s];
      double enter = s > 0 ? delta[s - 1] + hmm.log_forward[s - 1] : kLogZero;
      double best = std::max(stay, enter);
      tmp[s] = best == kLogZero ? kLogZero : best + hmm.states[s].log_likelihood(feats.frame(t));
    }
    delta = tmp;
  }
  if (delta[S - 1] == kLogZero) throw ValidationError("phone span admits no state path");
  return delta[S - 1] + hmm.log_forward[S - 1];
}

ScoreBreakdown score_breakdown(const DecodeResult& result, const AcousticModel& am,
                               const DecodeGraphSpec& spec, const FeatureMatrix& feats) {
  if (result.mode != spec.lexicon->kind)
    throw ValidationError("decode result and graph spec disagree on the joint mode");

  ScoreBreakdown b;
  int silences = 0;
  for (const auto& p : result.phones) {
    b.acoustic_log += constrained_phone_loglik(am, am.index_of(p.unit), feats, p.start, p.end);
    if (p.word_index < 0) {
      if (p.unit != kSilenceUnit)
        throw ValidationError("non-silence phone \"" + p.unit + "\" without a word");
      silences++;
    }
  }

  uint32_t h1 = Vocab::kNone, h2 = Vocab::kBos;
  double lm_log10 = 0.0;
  for (const auto& w : result.words) {
    uint32_t id = spec.lm->vocab().find_or_unk(w);
    lm_log10 += spec.lm->cond_logprob(h1, h2, id);
    h1 = h2;
    h2 = id;
  }
  lm_log10 += spec.lm->cond_logprob(h1, h2, Vocab::kEos);
  b.lm_log = spec.lm_scale * kLn10 * lm_log10;

  b.penalty_log = spec.word_insertion_penalty * static_cast<double>(result.words.size()) +
                  spec.silence_logprob * silences;

  if (std::abs(b.total() - result.total_log_score) > 1e-6)
    throw ValidationError("score breakdown does not reproduce the decode score (mismatched "
                          "models?): " +
                          std::to_string(b.total()) + " vs " +
                          std::to_string(result.total_log_score));
  return b;
}

void validate_result_pronunciations(const DecodeResult& result, const Lexicon& lexicon) {
  std::vector<std::vector<std::string>> spans(result.words.size());
  for (const auto& p : result.phones) {
    if (p.word_index < 0) continue;
    spans[p.word_index].push_back(p.unit);
  }
  for (size_t i = 0; i < result.words.size(); ++i) {
    bool ok = false;
    for (const auto& e : lexicon.entries) {
      if (e.word != result.words[i]) continue;
      if (e.pron.size() != spans[i].size()) continue;
      bool same = true;
      for (size_t k = 0; k < spans[i].size(); ++k)
        if (e.pron[k].str() != spans[i][k]) {
          same = false;
          break;
        }
      if (same) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw ValidationError("decoded phones for word \"" + result.words[i] +
                            "\" match no lexicon pronunciation");
  }
}

}  // namespace accentasr

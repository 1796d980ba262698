#include "accentasr/ngram.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace accentasr {

Vocab::Vocab() {
  add("<s>");
  add("</s>");
  add("<unk>");
}

uint32_t Vocab::add(const std::string& word) {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(words_.size());
  words_.push_back(word);
  index_.emplace(word, id);
  return id;
}

uint32_t Vocab::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kNone : it->second;
}

uint32_t Vocab::find_or_unk(const std::string& word) const {
  uint32_t id = find(word);
  return id == kNone ? kUnk : id;
}

std::string tag_word(const std::string& word, const std::string& accent_code) {
  return word + "_" + accent_code;
}

static std::vector<uint32_t> padded_ids(const TextUtterance& utt, LmMode mode, const Vocab& vocab) {
  std::vector<uint32_t> ids;
  ids.reserve(utt.words.size() + 2);
  ids.push_back(Vocab::kBos);
  for (const auto& w : utt.words) {
    const std::string token = mode == LmMode::kMulti ? tag_word(w, utt.accent_code) : w;
    ids.push_back(vocab.find_or_unk(token));
  }
  ids.push_back(Vocab::kEos);
  return ids;
}

static void count_utterance(const std::vector<uint32_t>& p, NgramCounts& c) {
  for (size_t i = 1; i < p.size(); ++i) c.uni[p[i]]++;
  for (size_t i = 0; i + 1 < p.size(); ++i) c.bi[make_key2(p[i], p[i + 1])]++;
  for (size_t i = 0; i + 2 < p.size(); ++i) c.tri[make_key3(p[i], p[i + 1], p[i + 2])]++;
}

static Vocab build_vocab(const TextCorpus& corpus, LmMode mode) {
  Vocab vocab;
  for (const auto& utt : corpus)
    for (const auto& w : utt.words)
      vocab.add(mode == LmMode::kMulti ? tag_word(w, utt.accent_code) : w);
  return vocab;
}

NgramCounts count_ngrams_serial(const TextCorpus& corpus, LmMode mode) {
  NgramCounts counts;
  counts.vocab = build_vocab(corpus, mode);
  for (const auto& utt : corpus) {
    if (utt.words.empty()) {
      counts.skipped_empty_utterances++;
      continue;
    }
    count_utterance(padded_ids(utt, mode, counts.vocab), counts);
  }
  return counts;
}

NgramCounts count_ngrams(const TextCorpus& corpus, LmMode mode) {
  NgramCounts counts;
  counts.vocab = build_vocab(corpus, mode);
  const int n = static_cast<int>(corpus.size());
#pragma omp parallel
  {
    NgramCounts local;
    uint64_t local_skipped = 0;
#pragma omp for schedule(static) nowait
    for (int i = 0; i < n; ++i) {
      if (corpus[i].words.empty()) {
        ++local_skipped;
        continue;
      }
      count_utterance(padded_ids(corpus[i], mode, counts.vocab), local);
    }
#pragma omp critical
    {
      counts.skipped_empty_utterances += local_skipped;
      for (auto& [k, v] : local.uni) counts.uni[k] += v;
      for (auto& [k, v] : local.bi) counts.bi[k] += v;
      for (auto& [k, v] : local.tri) counts.tri[k] += v;
    }
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Interpolated Witten-Bell estimation, stored as an exact backoff model:
//   p(w|h) = (c(h,w) + T(h) p(w|h')) / (C(h) + T(h))      for seen (h,w)
//   bow(h) = (1 - sum_seen p(w|h)) / (1 - sum_seen p(w|h'))
// which reproduces the interpolated probabilities for unseen words.
// ---------------------------------------------------------------------------

namespace {
struct ContextStats {
  double total = 0.0;   // C(h)
  double types = 0.0;   // T(h)
};
}  // namespace

NGramModel estimate_witten_bell(const NgramCounts& counts, const LmConfig& config) {
  NGramModel model;
  model.vocab_ = counts.vocab;
  const size_t vsize = counts.vocab.size();
  const double predictable = static_cast<double>(vsize - 1);  // everything but <s>
  const double p0 = 1.0 / predictable;

  std::vector<double> uni_count(vsize, 0.0);
  for (const auto& [w, c] : counts.uni) uni_count[w] += static_cast<double>(c);
  uni_count[Vocab::kUnk] += config.unk_pseudocount;

  double c1 = 0.0, t1 = 0.0;
  for (size_t w = 0; w < vsize; ++w) {
    if (w == Vocab::kBos) continue;
    c1 += uni_count[w];
    if (uni_count[w] > 0.0) t1 += 1.0;
  }
  if (c1 <= 0.0) throw ValidationError("cannot estimate a language model from zero counted tokens");

  std::vector<double> uni_prob(vsize, 0.0);
  for (size_t w = 0; w < vsize; ++w) {
    if (w == Vocab::kBos) continue;
    uni_prob[w] = (uni_count[w] + t1 * p0) / (c1 + t1);
    model.uni_[static_cast<uint32_t>(w)] = {std::log10(uni_prob[w]), 0.0};
  }
  model.uni_[Vocab::kBos] = {-99.0, 0.0};  // never predicted, context only

  // Bigrams.
  std::unordered_map<uint32_t, ContextStats> bi_ctx;
  for (const auto& [k, c] : counts.bi) {
    auto& s = bi_ctx[static_cast<uint32_t>(k.v >> 32)];
    s.total += static_cast<double>(c);
    s.types += 1.0;
  }
  std::unordered_map<uint32_t, double> sum_hi_bi, sum_lo_bi;
  for (const auto& [k, c] : counts.bi) {
    uint32_t v = static_cast<uint32_t>(k.v >> 32);
    uint32_t w = static_cast<uint32_t>(k.v & 0xffffffffu);
    const auto& s = bi_ctx[v];
    double p = (static_cast<double>(c) + s.types * uni_prob[w]) / (s.total + s.types);
    model.bi_[k] = {std::log10(p), 0.0};
    sum_hi_bi[v] += p;
    sum_lo_bi[v] += uni_prob[w];
  }
  for (const auto& [v, hi] : sum_hi_bi) {
    double num = 1.0 - hi;
    double den = 1.0 - sum_lo_bi[v];
    double bow = (num <= 1e-15 || den <= 1e-15) ? 1.0 : num / den;
    model.uni_[v].backoff = std::log10(bow);
  }

  // Trigrams.
  std::unordered_map<Key2, ContextStats, Key2Hash> tri_ctx;
  for (const auto& [k, c] : counts.tri) {
    auto& s = tri_ctx[Key2{k.hi}];
    s.total += static_cast<double>(c);
    s.types += 1.0;
  }
  std::unordered_map<Key2, double, Key2Hash> sum_hi_tri, sum_lo_tri;
  for (const auto& [k, c] : counts.tri) {
    Key2 ctx{k.hi};
    uint32_t v = static_cast<uint32_t>(k.hi & 0xffffffffu);
    uint32_t w = k.lo;
    const auto& s = tri_ctx[ctx];
    // The (v,w) bigram always co-occurs with any (u,v,w) trigram.
    double lower = std::pow(10.0, model.bi_.at(make_key2(v, w)).logprob);
    double p = (static_cast<double>(c) + s.types * lower) / (s.total + s.types);
    model.tri_[k] = {std::log10(p), 0.0};
    sum_hi_tri[ctx] += p;
    sum_lo_tri[ctx] += lower;
  }
  for (const auto& [ctx, hi] : sum_hi_tri) {
    double num = 1.0 - hi;
    double den = 1.0 - sum_lo_tri[ctx];
    double bow = (num <= 1e-15 || den <= 1e-15) ? 1.0 : num / den;
    auto it = model.bi_.find(ctx);
    if (it != model.bi_.end()) it->second.backoff = std::log10(bow);
  }
  return model;
}

NGramModel train_trigram(const TextCorpus& corpus, LmMode mode, const LmConfig& config) {
  if (corpus.empty()) throw ValidationError("cannot train a language model on an empty corpus");
  NgramCounts counts = count_ngrams(corpus, mode);
  if (counts.uni.empty())
    throw ValidationError("cannot train a language model: every utterance is empty");
  return estimate_witten_bell(counts, config);
}

double NGramModel::cond_logprob(uint32_t h1, uint32_t h2, uint32_t w) const {
  if (h1 != Vocab::kNone && h2 != Vocab::kNone) {
    auto it = tri_.find(make_key3(h1, h2, w));
    if (it != tri_.end()) return it->second.logprob;
    double bow = 0.0;
    auto ctx = bi_.find(make_key2(h1, h2));
    if (ctx != bi_.end()) bow = ctx->second.backoff;
    return bow + cond_logprob(Vocab::kNone, h2, w);
  }
  if (h2 != Vocab::kNone) {
    auto it = bi_.find(make_key2(h2, w));
    if (it != bi_.end()) return it->second.logprob;
    double bow = 0.0;
    auto ctx = uni_.find(h2);
    if (ctx != uni_.end()) bow = ctx->second.backoff;
    auto u = uni_.find(w);
    return bow + (u != uni_.end() ? u->second.logprob : uni_.at(Vocab::kUnk).logprob);
  }
  auto u = uni_.find(w);
  return u != uni_.end() ? u->second.logprob : uni_.at(Vocab::kUnk).logprob;
}

double NGramModel::score_sequence(const std::vector<std::string>& words) const {
  uint32_t h1 = Vocab::kNone, h2 = Vocab::kBos;
  double total = 0.0;
  for (const auto& w : words) {
    uint32_t id = vocab_.find_or_unk(w);
    total += cond_logprob(h1, h2, id);
    h1 = h2;
    h2 = id;
  }
  total += cond_logprob(h1, h2, Vocab::kEos);
  return total;
}

double NGramModel::conditional_mass(const std::vector<std::string>& history) const {
  uint32_t h1 = Vocab::kNone, h2 = Vocab::kNone;
  if (history.size() == 1) {
    h2 = vocab_.find_or_unk(history[0]);
  } else if (history.size() >= 2) {
    h1 = vocab_.find_or_unk(history[history.size() - 2]);
    h2 = vocab_.find_or_unk(history[history.size() - 1]);
  }
  double sum = 0.0;
  for (uint32_t w = 0; w < vocab_.size(); ++w) {
    if (w == Vocab::kBos) continue;
    if (h2 == Vocab::kNone)
      sum += std::pow(10.0, cond_logprob(Vocab::kNone, Vocab::kNone, w));
    else
      sum += std::pow(10.0, cond_logprob(h1, h2, w));
  }
  return sum;
}

static bool special_word(const std::string& w) {
  return w == "<s>" || w == "</s>" || w == "<unk>";
}

bool NGramModel::tagged_vocabulary() const {
  bool any = false;
  for (uint32_t w = 0; w < vocab_.size(); ++w) {
    const std::string& s = vocab_.word(w);
    if (special_word(s)) continue;
    any = true;
    auto pos = s.find('_');
    if (pos == std::string::npos || pos + 1 >= s.size()) return false;
  }
  return any;
}

size_t NGramModel::num_ngrams(int order) const {
  switch (order) {
    case 1: return uni_.size();
    case 2: return bi_.size();
    case 3: return tri_.size();
    default: return 0;
  }
}

// ---------------------------------------------------------------------------
// ARPA serialization
// ---------------------------------------------------------------------------

static std::string fmt_log(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_arpa(const NGramModel& model, std::ostream& out) {
  const Vocab& vocab = model.vocab();

  std::vector<std::pair<std::string, const NgramEntry*>> uni;
  uni.reserve(model.unigrams().size());
  for (const auto& [w, e] : model.unigrams()) uni.emplace_back(vocab.word(w), &e);
  std::sort(uni.begin(), uni.end());

  std::vector<std::pair<std::string, const NgramEntry*>> bi;
  bi.reserve(model.bigrams().size());
  for (const auto& [k, e] : model.bigrams()) {
    uint32_t a = static_cast<uint32_t>(k.v >> 32), b = static_cast<uint32_t>(k.v & 0xffffffffu);
    bi.emplace_back(vocab.word(a) + " " + vocab.word(b), &e);
  }
  std::sort(bi.begin(), bi.end());

  std::vector<std::pair<std::string, const NgramEntry*>> tri;
  tri.reserve(model.trigrams().size());
  for (const auto& [k, e] : model.trigrams()) {
    uint32_t a = static_cast<uint32_t>(k.hi >> 32), b = static_cast<uint32_t>(k.hi & 0xffffffffu);
    tri.emplace_back(vocab.word(a) + " " + vocab.word(b) + " " + vocab.word(k.lo), &e);
  }
  std::sort(tri.begin(), tri.end());

  out << "\\data\\\n";
  out << "ngram 1=" << uni.size() << "\n";
  out << "ngram 2=" << bi.size() << "\n";
  out << "ngram 3=" << tri.size() << "\n\n";
  out << "\\1-grams:\n";
  for (const auto& [words, e] : uni)
    out << fmt_log(e->logprob) << '\t' << words << '\t' << fmt_log(e->backoff) << '\n';
  out << "\n\\2-grams:\n";
  for (const auto& [words, e] : bi)
    out << fmt_log(e->logprob) << '\t' << words << '\t' << fmt_log(e->backoff) << '\n';
  out << "\n\\3-grams:\n";
  for (const auto& [words, e] : tri) out << fmt_log(e->logprob) << '\t' << words << '\n';
  out << "\n\\end\\\n";
}

void write_arpa_file(const NGramModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write ARPA file: " + path);
  write_arpa(model, out);
}

namespace {
struct ArpaReader {
  std::istream& in;
  int lineno = 0;
  std::string line;

  bool next_line() {
    while (std::getline(in, line)) {
      ++lineno;
      // strip trailing CR
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("ARPA parse error at line " + std::to_string(lineno) + ": " + msg);
  }
};
}  // namespace

NGramModel read_arpa(std::istream& in) {
  ArpaReader r{in};
  // header
  for (;;) {
    if (!r.next_line()) r.fail("missing \\data\\ header");
    if (r.line == "\\data\\") break;
    if (!r.line.empty()) r.fail("expected \\data\\ header, got \"" + r.line + "\"");
  }
  size_t declared[4] = {0, 0, 0, 0};
  bool has_order[4] = {false, false, false, false};
  for (;;) {
    if (!r.next_line()) r.fail("unexpected end of file in \\data\\ section");
    if (r.line.empty()) continue;
    if (r.line[0] == '\\') break;
    unsigned order = 0;
    unsigned long long count = 0;
    if (std::sscanf(r.line.c_str(), "ngram %u=%llu", &order, &count) != 2 || order < 1 || order > 3)
      r.fail("malformed count line \"" + r.line + "\"");
    declared[order] = count;
    has_order[order] = true;
  }
  if (!has_order[1]) r.fail("missing \"ngram 1=\" count");

  NGramModel model;
  size_t seen[4] = {0, 0, 0, 0};
  int current = 0;

  auto begin_section = [&](const std::string& header) {
    if (header == "\\1-grams:") return 1;
    if (header == "\\2-grams:") return 2;
    if (header == "\\3-grams:") return 3;
    if (header == "\\end\\") return -1;
    r.fail("unknown section header \"" + header + "\"");
    return 0;
  };

  current = begin_section(r.line);
  while (current > 0) {
    int next = 0;
    for (;;) {
      if (!r.next_line()) r.fail("unexpected end of file; missing \\end\\");
      if (r.line.empty()) continue;
      if (r.line[0] == '\\') {
        next = begin_section(r.line);
        break;
      }
      auto tokens = split_ws(r.line);
      const int order = current;
      if (tokens.size() != static_cast<size_t>(order) + 1 &&
          tokens.size() != static_cast<size_t>(order) + 2)
        r.fail("expected logprob, " + std::to_string(order) + " words, optional backoff");
      double logprob = 0.0, backoff = 0.0;
      try {
        logprob = std::stod(tokens[0]);
        if (tokens.size() == static_cast<size_t>(order) + 2) backoff = std::stod(tokens.back());
      } catch (const std::exception&) {
        r.fail("malformed numeric field in \"" + r.line + "\"");
      }
      if (logprob > 1e-9) r.fail("positive log probability in \"" + r.line + "\"");
      uint32_t ids[3] = {0, 0, 0};
      for (int i = 0; i < order; ++i) {
        const std::string& w = tokens[1 + i];
        if (order == 1) {
          ids[i] = model.vocab_.add(w);
        } else {
          ids[i] = model.vocab_.find(w);
          if (ids[i] == Vocab::kNone) r.fail("word \"" + w + "\" not present in 1-grams");
        }
      }
      if (order == 1) {
        if (!model.uni_.emplace(ids[0], NgramEntry{logprob, backoff}).second)
          r.fail("duplicate 1-gram \"" + tokens[1] + "\"");
      } else if (order == 2) {
        if (!model.bi_.emplace(make_key2(ids[0], ids[1]), NgramEntry{logprob, backoff}).second)
          r.fail("duplicate 2-gram");
      } else {
        if (!model.tri_.emplace(make_key3(ids[0], ids[1], ids[2]), NgramEntry{logprob, backoff}).second)
          r.fail("duplicate 3-gram");
      }
      seen[order]++;
    }
    if (seen[current] != declared[current])
      r.fail("section \\" + std::to_string(current) + "-grams: has " + std::to_string(seen[current]) +
             " entries but \\data\\ declares " + std::to_string(declared[current]));
    current = next;
  }
  for (int o = 2; o <= 3; ++o)
    if (has_order[o] && seen[o] != declared[o])
      r.fail("\\data\\ declares " + std::to_string(declared[o]) + " " + std::to_string(o) +
             "-grams but none were read");

  // Every n-gram's history must exist as an (n-1)-gram.
  for (const auto& [k, e] : model.bi_) {
    (void)e;
    if (!model.uni_.count(static_cast<uint32_t>(k.v >> 32)))
      throw ParseError("ARPA model invalid: a 2-gram history is missing from the 1-grams");
  }
  for (const auto& [k, e] : model.tri_) {
    (void)e;
    if (!model.bi_.count(Key2{k.hi}))
      throw ParseError("ARPA model invalid: a 3-gram history is missing from the 2-grams");
  }
  if (model.uni_.find(Vocab::kUnk) == model.uni_.end())
    model.uni_[Vocab::kUnk] = {-99.0, 0.0};
  return model;
}

NGramModel read_arpa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open ARPA file: " + path);
  return read_arpa(in);
}

static std::string accent_suffix(const std::string& word) {
  if (special_word(word)) return "";
  auto pos = word.find('_');
  return pos == std::string::npos ? "" : word.substr(pos + 1);
}

CrossAccentAudit audit_cross_accent(const NGramModel& model) {
  if (!model.tagged_vocabulary())
    throw ValidationError("cross-accent audit not applicable: vocabulary is not accent-tagged");
  CrossAccentAudit audit;
  const Vocab& vocab = model.vocab();
  auto check = [&](std::initializer_list<uint32_t> ids) {
    std::string first;
    bool mixed = false;
    for (uint32_t id : ids) {
      std::string acc = accent_suffix(vocab.word(id));
      if (acc.empty()) continue;
      if (first.empty())
        first = acc;
      else if (acc != first)
        mixed = true;
    }
    if (mixed) {
      audit.violations++;
      std::string s;
      for (uint32_t id : ids) {
        if (!s.empty()) s += ' ';
        s += vocab.word(id);
      }
      audit.offenders.push_back(s);
    }
  };
  for (const auto& [k, e] : model.bigrams()) {
    (void)e;
    check({static_cast<uint32_t>(k.v >> 32), static_cast<uint32_t>(k.v & 0xffffffffu)});
  }
  for (const auto& [k, e] : model.trigrams()) {
    (void)e;
    check({static_cast<uint32_t>(k.hi >> 32), static_cast<uint32_t>(k.hi & 0xffffffffu), k.lo});
  }
  std::sort(audit.offenders.begin(), audit.offenders.end());
  return audit;
}

double perplexity(const NGramModel& model, const TextCorpus& corpus, LmMode mode) {
  double total = 0.0;
  uint64_t tokens = 0;
  for (const auto& utt : corpus) {
    if (utt.words.empty()) continue;
    std::vector<std::string> words = utt.words;
    if (mode == LmMode::kMulti)
      for (auto& w : words) w = tag_word(w, utt.accent_code);
    total += model.score_sequence(words);
    tokens += words.size() + 1;  // </s>
  }
  if (tokens == 0) throw ValidationError("perplexity of an empty corpus is undefined");
  return std::pow(10.0, -total / static_cast<double>(tokens));
}

double uniform_unigram_perplexity(const NGramModel& model) {
  return static_cast<double>(model.vocab().size() - 1);
}

}  // namespace accentasr

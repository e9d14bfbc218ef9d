#include "ttbys/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "ttbys/error.hpp"

namespace ttbys {

// ---------------------------------------------------------------------------
// Format and validation

void validate_dialogue(const AnnotatedDialogue& d) {
  if (d.id.empty()) fail(ErrorCode::InvalidArgument, "dialogue id is empty");
  if (!d.speakers.empty()) {
    const std::set<std::string> distinct(d.speakers.begin(), d.speakers.end());
    if (distinct.size() > 2) {
      fail(ErrorCode::MultiPartyDialogue,
           "dialogue " + d.id + " has " + std::to_string(distinct.size()) + " speakers");
    }
    if (d.speakers.size() != d.utterances.size()) {
      fail(ErrorCode::LabelMisalignment, "dialogue " + d.id + ": speakers do not align with utterances");
    }
  }
  try {
    validate_history(d.utterances);
  } catch (const Error& e) {
    throw Error(e.code(), "dialogue " + d.id + ": " + e.what());
  }
  if (d.labels.size() != d.utterances.size()) {
    fail(ErrorCode::LabelMisalignment, "dialogue " + d.id + ": " + std::to_string(d.labels.size()) +
                                           " label slots for " +
                                           std::to_string(d.utterances.size()) + " utterances");
  }
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    const auto& l = d.labels[i];
    const Role role = d.utterances.utterances[i].role;
    if (role == Role::Persuader && (l.desire || l.belief)) {
      fail(ErrorCode::LabelMisalignment,
           "dialogue " + d.id + ": persuader utterance " + std::to_string(i) + " carries desire/belief");
    }
    if (role == Role::Persuadee && l.strategy) {
      fail(ErrorCode::LabelMisalignment,
           "dialogue " + d.id + ": persuadee utterance " + std::to_string(i) + " carries a strategy");
    }
  }
}

json encode(const AnnotatedDialogue& d) {
  json utterances = json::array();
  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    json u = encode(d.utterances.utterances[i]);
    if (!d.speakers.empty()) u["speaker"] = d.speakers[i];
    const auto& l = d.labels.at(i);
    if (l.desire) u["desire"] = encode_desire(*l.desire);
    if (l.belief) u["belief"] = encode(*l.belief);
    if (l.strategy) u["strategy"] = encode_strategy(*l.strategy);
    utterances.push_back(std::move(u));
  }
  return {{"version", kCorpusFormatVersion},
          {"id", d.id},
          {"background", d.background},
          {"utterances", std::move(utterances)}};
}

AnnotatedDialogue decode_dialogue(const json& j) {
  AnnotatedDialogue d;
  if (j.contains("version") && j["version"] != kCorpusFormatVersion) {
    fail(ErrorCode::Parse, "unsupported corpus version " + j["version"].dump());
  }
  d.id = require(j, "id").get<std::string>();
  d.background = j.value("background", std::string());
  const json& us = require(j, "utterances");
  if (!us.is_array()) fail(ErrorCode::Parse, "utterances must be an array");
  bool any_speaker = false;
  for (const auto& u : us) any_speaker = any_speaker || u.contains("speaker");
  for (const auto& u : us) {
    d.utterances.utterances.push_back(decode_utterance(u));
    if (any_speaker) d.speakers.push_back(u.value("speaker", std::string()));
    UtteranceLabels l;
    if (u.contains("desire") && !u["desire"].is_null()) l.desire = decode_desire(u["desire"]);
    if (u.contains("belief") && !u["belief"].is_null()) l.belief = decode_belief(u["belief"]);
    if (u.contains("strategy") && !u["strategy"].is_null()) l.strategy = decode_strategy(u["strategy"]);
    d.labels.push_back(std::move(l));
  }
  return d;
}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto d = decode_dialogue(json::parse(line));
      validate_dialogue(d);
      if (!ids.insert(d.id).second) fail(ErrorCode::Parse, "duplicate dialogue id " + d.id);
      corpus.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, e.what(), line_no);
    } catch (const Error& e) {
      // Keep the semantic code for validation failures; syntax problems are Parse.
      const ErrorCode code = e.code() == ErrorCode::UnknownLabel ? ErrorCode::Parse : e.code();
      throw Error(code, e.what(), line_no);
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open corpus " + path.string());
  return parse_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& d : corpus) out << encode(d).dump() << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write corpus " + path.string());
  write_corpus(corpus, out);
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

// ---------------------------------------------------------------------------
// Annotation rules

DesireLevel label_desire(const std::vector<SentencePolarity>& sentences) {
  bool pos = false;
  bool neg = false;
  for (const auto& s : sentences) {
    pos = pos || s.polarity == SentenceKind::Positive;
    neg = neg || s.polarity == SentenceKind::Negative;
  }
  if (pos && neg) return DesireLevel::hesitant();
  if (pos) return DesireLevel::willing();
  if (neg) return DesireLevel::unwilling();
  fail(ErrorCode::AllNeutral, "no positive or negative sentence to label");
}

std::vector<SentencePolarity> carry_over(const std::vector<SentencePolarity>& prev_negatives,
                                         const std::vector<SentencePolarity>& current) {
  std::vector<SentencePolarity> out;
  for (const auto& s : current) {
    if (s.polarity != SentenceKind::Neutral) out.push_back(s);
  }
  for (const auto& s : prev_negatives) {
    if (s.polarity != SentenceKind::Negative) {
      fail(ErrorCode::InvalidArgument, "carried sentence '" + s.text + "' is not negative");
    }
    if (!s.resolved) out.push_back(s);
  }
  return out;
}

BeliefState beliefs_from_sentences(const std::vector<SentencePolarity>& sentences) {
  std::vector<BeliefStatement> out;
  for (const auto& s : sentences) {
    if (s.polarity == SentenceKind::Neutral) continue;
    out.push_back({s.polarity == SentenceKind::Positive ? Polarity::Positive : Polarity::Negative, s.text});
  }
  return BeliefState(std::move(out));
}

// ---------------------------------------------------------------------------
// Statistics

std::size_t progress_bucket(std::size_t k, std::size_t count) {
  if (count <= 1 || k == 0) return 0;
  const std::size_t span = count - 1;
  const std::size_t last = kProgressPoints - 1;
  // ceil(last * k / span): position k/span falls in ((b-1)/last, b/last].
  return std::min(last, (last * k + span - 1) / span);
}

namespace {

std::size_t whitespace_tokens(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  std::string w;
  while (in >> w) ++n;
  return n;
}

}  // namespace

CorpusStats compute_stats(const Corpus& corpus) {
  if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot compute statistics of an empty corpus");
  CorpusStats st;
  st.dialogues = corpus.size();

  std::size_t persuader_utts = 0;
  std::size_t persuadee_utts = 0;
  std::size_t persuader_tokens = 0;
  std::size_t persuadee_tokens = 0;
  std::size_t desire_turns = 0;
  long desire_sum = 0;
  std::size_t belief_turns = 0;
  std::size_t belief_sum = 0;
  std::array<std::array<std::size_t, kStrategyCount>, kProgressPoints> progress_counts{};
  std::array<std::size_t, kProgressPoints> progress_totals{};
  std::array<long, kProgressPoints> traj_sum{};
  std::array<std::size_t, kProgressPoints> traj_n{};
  std::array<std::size_t, kProgressPoints> pos_n{};
  std::array<std::size_t, kProgressPoints> neg_n{};

  for (const auto& d : corpus) {
    st.utterances += d.utterances.size();
    std::vector<std::size_t> persuader_idx;
    std::vector<std::size_t> persuadee_idx;
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      const auto& u = d.utterances.utterances[i];
      if (u.role == Role::Persuader) {
        ++persuader_utts;
        persuader_tokens += whitespace_tokens(u.text);
        persuader_idx.push_back(i);
      } else {
        ++persuadee_utts;
        persuadee_tokens += whitespace_tokens(u.text);
        persuadee_idx.push_back(i);
      }
    }
    for (std::size_t k = 0; k < persuader_idx.size(); ++k) {
      const auto& l = d.labels[persuader_idx[k]];
      if (!l.strategy) continue;
      const auto s = static_cast<std::size_t>(*l.strategy);
      ++st.strategy_counts[s];
      const std::size_t b = progress_bucket(k, persuader_idx.size());
      ++progress_counts[b][s];
      ++progress_totals[b];
    }
    for (std::size_t k = 0; k < persuadee_idx.size(); ++k) {
      const auto& l = d.labels[persuadee_idx[k]];
      const std::size_t b = progress_bucket(k, persuadee_idx.size());
      if (l.desire) {
        ++desire_turns;
        desire_sum += l.desire->value();
        traj_sum[b] += l.desire->value();
        ++traj_n[b];
      }
      if (l.belief) {
        ++belief_turns;
        belief_sum += l.belief->size();
        for (const auto& s : l.belief->statements()) {
          ++(s.polarity == Polarity::Positive ? pos_n : neg_n)[b];
        }
      }
    }
  }

  const auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
  st.utterances_per_dialogue = ratio(static_cast<double>(st.utterances), static_cast<double>(st.dialogues));
  st.exchanges_per_dialogue = ratio(static_cast<double>(persuadee_utts), static_cast<double>(st.dialogues));
  st.persuader_utterance_tokens = ratio(static_cast<double>(persuader_tokens), static_cast<double>(persuader_utts));
  st.persuadee_utterance_tokens = ratio(static_cast<double>(persuadee_tokens), static_cast<double>(persuadee_utts));
  st.mean_desire = ratio(static_cast<double>(desire_sum), static_cast<double>(desire_turns));
  st.beliefs_per_turn = ratio(static_cast<double>(belief_sum), static_cast<double>(belief_turns));

  std::size_t strategy_total = 0;
  for (auto c : st.strategy_counts) strategy_total += c;
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    st.strategy_percentages[s] =
        100.0 * ratio(static_cast<double>(st.strategy_counts[s]), static_cast<double>(strategy_total));
  }
  for (std::size_t b = 0; b < kProgressPoints; ++b) {
    for (std::size_t s = 0; s < kStrategyCount; ++s) {
      st.strategy_progress[b][s] = 100.0 * ratio(static_cast<double>(progress_counts[b][s]),
                                                 static_cast<double>(progress_totals[b]));
    }
    st.desire_trajectory[b] = ratio(static_cast<double>(traj_sum[b]), static_cast<double>(traj_n[b]));
    const double pn = static_cast<double>(pos_n[b] + neg_n[b]);
    st.positive_belief_share[b] = ratio(static_cast<double>(pos_n[b]), pn);
    st.negative_belief_share[b] = ratio(static_cast<double>(neg_n[b]), pn);
  }
  return st;
}

std::string format_stats(const CorpusStats& st) {
  std::ostringstream out;
  out << std::fixed;
  const auto row = [&out](const std::string& label, const std::string& value) {
    out << std::left << std::setw(36) << label << value << '\n';
  };
  const auto num = [](double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };
  row("Statistic", "Value");
  row("Total dialogues", std::to_string(st.dialogues));
  row("Total utterances", std::to_string(st.utterances));
  row("Avg. dialogue length (turns)", num(st.utterances_per_dialogue, 2));
  row("Avg. exchanges per dialogue", num(st.exchanges_per_dialogue, 2));
  row("Avg. utterance length (persuader)", num(st.persuader_utterance_tokens, 2));
  row("Avg. utterance length (persuadee)", num(st.persuadee_utterance_tokens, 2));
  row("Avg. desire", num(st.mean_desire, 2));
  row("Avg. belief number per turn", num(st.beliefs_per_turn, 2));
  out << '\n';
  out << std::left << std::setw(18) << "Category" << std::setw(30) << "Strategy" << std::right
      << std::setw(8) << "Count" << std::setw(12) << "Percentage" << '\n';
  for (Strategy s : all_strategies()) {
    const auto i = static_cast<std::size_t>(s);
    out << std::left << std::setw(18) << to_string(category_of(s)) << std::setw(30) << name_of(s)
        << std::right << std::setw(8) << st.strategy_counts[i] << std::setw(11)
        << num(st.strategy_percentages[i], 2) << "%\n";
  }
  out << '\n' << "Progress point     ";
  for (std::size_t b = 0; b < kProgressPoints; ++b) out << std::setw(8) << num(0.2 * b, 1);
  out << "\nDesire trajectory  ";
  for (double v : st.desire_trajectory) out << std::setw(8) << num(v, 2);
  out << "\nPositive beliefs   ";
  for (double v : st.positive_belief_share) out << std::setw(8) << num(v, 2);
  out << "\nNegative beliefs   ";
  for (double v : st.negative_belief_share) out << std::setw(8) << num(v, 2);
  out << '\n';
  return out.str();
}

json encode(const CorpusStats& st) {
  json strategies = json::array();
  for (Strategy s : all_strategies()) {
    const auto i = static_cast<std::size_t>(s);
    strategies.push_back({{"strategy", std::string(name_of(s))},
                          {"category", std::string(to_string(category_of(s)))},
                          {"count", st.strategy_counts[i]},
                          {"percentage", st.strategy_percentages[i]}});
  }
  json progress = json::array();
  for (std::size_t b = 0; b < kProgressPoints; ++b) {
    json point = {{"point", 0.2 * static_cast<double>(b)},
                  {"desire", st.desire_trajectory[b]},
                  {"positive_belief_share", st.positive_belief_share[b]},
                  {"negative_belief_share", st.negative_belief_share[b]},
                  {"strategy_percentages", json::object()}};
    for (Strategy s : all_strategies()) {
      point["strategy_percentages"][std::string(name_of(s))] =
          st.strategy_progress[b][static_cast<std::size_t>(s)];
    }
    progress.push_back(std::move(point));
  }
  return {{"dialogues", st.dialogues},
          {"utterances", st.utterances},
          {"utterances_per_dialogue", st.utterances_per_dialogue},
          {"exchanges_per_dialogue", st.exchanges_per_dialogue},
          {"persuader_utterance_tokens", st.persuader_utterance_tokens},
          {"persuadee_utterance_tokens", st.persuadee_utterance_tokens},
          {"mean_desire", st.mean_desire},
          {"beliefs_per_turn", st.beliefs_per_turn},
          {"strategies", std::move(strategies)},
          {"progress", std::move(progress)}};
}

// ---------------------------------------------------------------------------
// Synthetic corpora

std::uint64_t SplitRng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitRng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  return next() % bound;
}

double SplitRng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

DesireProfile desire_profile_from_string(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "trend-positive" || n == "default") return DesireProfile::TrendPositive;
  if (n == "always-willing") return DesireProfile::AlwaysWilling;
  if (n == "always-unwilling") return DesireProfile::AlwaysUnwilling;
  fail(ErrorCode::InvalidArgument, "unknown desire profile '" + std::string(name) + "'");
}

namespace {

struct Topic {
  const char* target;
  const char* benefit;
  std::array<const char*, 3> concerns;
};

constexpr std::array<Topic, 8> kTopics = {{
    {"gym membership", "staying fit", {"the monthly cost", "finding time after work", "using the machines"}},
    {"neighborhood cleanup", "meeting the neighbors", {"giving up a free weekend", "the early start", "whether it makes a difference"}},
    {"annual health check", "catching problems early", {"the price of the tests", "waiting at the clinic", "bad news from the results"}},
    {"online privacy course", "protecting personal data", {"how relevant it is to the job", "the hours of study", "the technical jargon"}},
    {"animal shelter volunteering", "helping abandoned pets", {"the weekly commitment", "allergies to fur", "the long commute"}},
    {"meditation practice", "lowering daily stress", {"sitting still for long", "whether it really works", "fitting it into the morning"}},
    {"recycling program", "reducing household waste", {"sorting everything by hand", "the extra bins in the kitchen", "whether the collection is reliable"}},
    {"weekend book club", "reading more widely", {"keeping up with the reading list", "speaking in front of strangers", "the cost of new books"}},
}};

constexpr std::array<const char*, 6> kNames = {"Mary", "Tom", "Sarah", "Kyle", "Emily", "John"};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string persuader_text(Strategy s, const Topic& t, SplitRng& rng) {
  const std::string target = t.target;
  const std::string benefit = t.benefit;
  const std::string concern = t.concerns[rng.below(t.concerns.size())];
  switch (s) {
    case Strategy::AffirmationAndReassurance:
      return "I understand this feels like a lot, but I believe you can handle the " + target + ".";
    case Strategy::ReflectionOfFeelings:
      return "It sounds like you are feeling uneasy about " + concern + ".";
    case Strategy::PersonalStory:
      return "When I first tried the " + target + " I had the same doubts, and it turned out great for me.";
    case Strategy::ExpressionOfViews:
      return "I really think the " + target + " would be good for you.";
    case Strategy::EnhancementOfViews:
      return "Honestly, the " + target + " is the best choice for " + benefit + ", especially for you.";
    case Strategy::LogicalAppeal:
      return "If you join the " + target + ", you will be " + benefit + " and saving effort later on.";
    case Strategy::GivingExamples:
      return "For example, many people like you started the " + target + " and kept going for months.";
    case Strategy::SupplyingInformation:
      return "The " + target + " only takes a couple of hours a week and helps with " + benefit + ".";
    case Strategy::TaskInquiry:
      return "What worries you most about the " + target + "?";
  }
  return {};
}

Strategy sample_strategy(std::optional<DesireLevel> desire, SplitRng& rng) {
  using S = Strategy;
  struct Weighted {
    S s;
    double w;
  };
  static const std::array<Weighted, 4> kOpen = {{{S::ExpressionOfViews, 0.5}, {S::SupplyingInformation, 0.3},
                                                 {S::LogicalAppeal, 0.1}, {S::TaskInquiry, 0.1}}};
  static const std::array<Weighted, 4> kNeg = {{{S::ReflectionOfFeelings, 0.45}, {S::AffirmationAndReassurance, 0.3},
                                                {S::TaskInquiry, 0.15}, {S::PersonalStory, 0.1}}};
  static const std::array<Weighted, 4> kMid = {{{S::SupplyingInformation, 0.45}, {S::LogicalAppeal, 0.3},
                                                {S::GivingExamples, 0.15}, {S::ReflectionOfFeelings, 0.1}}};
  static const std::array<Weighted, 4> kPos = {{{S::ExpressionOfViews, 0.5}, {S::EnhancementOfViews, 0.3},
                                                {S::PersonalStory, 0.1}, {S::AffirmationAndReassurance, 0.1}}};
  const auto& table = !desire ? kOpen
                      : desire->value() < 0 ? kNeg
                      : desire->value() == 0 ? kMid
                                             : kPos;
  double u = rng.unit();
  for (const auto& w : table) {
    if (u < w.w) return w.s;
    u -= w.w;
  }
  return table.back().s;
}

}  // namespace

Corpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n_dialogues, const SyntheticOptions& opt) {
  if (n_dialogues == 0) fail(ErrorCode::InvalidArgument, "n_dialogues must be >= 1");
  if (opt.min_exchanges == 0 || opt.max_exchanges < opt.min_exchanges) {
    fail(ErrorCode::InvalidArgument, "invalid exchange range");
  }
  SplitRng rng(seed);
  Corpus corpus;
  corpus.reserve(n_dialogues);
  for (std::size_t n = 0; n < n_dialogues; ++n) {
    const Topic& topic = kTopics[rng.below(kTopics.size())];
    const std::size_t a = rng.below(kNames.size());
    const std::size_t b = (a + 1 + rng.below(kNames.size() - 1)) % kNames.size();
    const std::string persuader = kNames[a];
    const std::string persuadee = kNames[b];
    const std::size_t exchanges =
        opt.min_exchanges + rng.below(opt.max_exchanges - opt.min_exchanges + 1);
    const bool ends_with_persuadee = rng.unit() < 0.3;

    AnnotatedDialogue d;
    std::ostringstream id;
    id << opt.id_prefix << '-' << std::setw(4) << std::setfill('0') << n;
    d.id = id.str();
    d.background = persuader + " wants " + persuadee + " to try the " + topic.target + ".";

    const auto add = [&d](Role role, std::string text, const std::string& speaker, UtteranceLabels labels) {
      d.utterances.utterances.push_back({role, std::move(text)});
      d.speakers.push_back(speaker);
      d.labels.push_back(std::move(labels));
    };

    Strategy opener = sample_strategy(std::nullopt, rng);
    add(Role::Persuader, "Hi " + persuadee + ". " + persuader_text(opener, topic, rng), persuader,
        UtteranceLabels{std::nullopt, std::nullopt, opener});

    std::vector<SentencePolarity> carried;
    for (std::size_t e = 0; e < exchanges; ++e) {
      const double progress = exchanges == 1 ? 1.0 : static_cast<double>(e) / static_cast<double>(exchanges - 1);
      double p_positive = 0.15 + 0.75 * progress;
      double p_resolve = 0.2 + 0.7 * progress;
      if (opt.profile == DesireProfile::AlwaysWilling) p_positive = 1.0, p_resolve = 1.0;
      if (opt.profile == DesireProfile::AlwaysUnwilling) p_positive = 0.0, p_resolve = 0.0;

      std::vector<SentencePolarity> sentences;
      const std::size_t count = 1 + rng.below(2);
      for (std::size_t k = 0; k < count; ++k) {
        if (rng.unit() < p_positive) {
          const std::array<std::string, 3> pos = {"the " + std::string(topic.target) + " is interesting",
                                                  std::string(topic.benefit) + " is valuable",
                                                  "the " + std::string(topic.target) + " is worth a try"};
          sentences.push_back({pos[rng.below(pos.size())], SentenceKind::Positive, false});
        } else {
          const std::string concern = topic.concerns[rng.below(topic.concerns.size())];
          const std::array<std::string, 3> neg = {"unsure about " + concern, "worried about " + concern,
                                                  "not convinced about " + concern};
          sentences.push_back({neg[rng.below(neg.size())], SentenceKind::Negative, false});
        }
      }
      for (auto& c : carried) c.resolved = rng.unit() < p_resolve;
      auto labeled = carry_over(carried, sentences);
      const DesireLevel desire = label_desire(labeled);
      BeliefState belief = beliefs_from_sentences(labeled);

      std::string text;
      for (const auto& s : sentences) {
        if (!text.empty()) text += ' ';
        text += capitalize(s.polarity == SentenceKind::Positive ? "well, " + s.text : "I am " + s.text) + ".";
      }
      if (rng.unit() < 0.25) text += " I have a lot going on this week.";
      add(Role::Persuadee, text, persuadee, UtteranceLabels{desire, std::move(belief), std::nullopt});

      carried.clear();
      for (auto& s : labeled) {
        if (s.polarity == SentenceKind::Negative) {
          carried.push_back({s.text, SentenceKind::Negative, false});
        }
      }

      const bool last = e + 1 == exchanges;
      if (last && ends_with_persuadee) break;
      const Strategy reply = sample_strategy(desire, rng);
      add(Role::Persuader, persuader_text(reply, topic, rng), persuader,
          UtteranceLabels{std::nullopt, std::nullopt, reply});
    }
    corpus.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace ttbys

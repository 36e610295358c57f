#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vqkit/distortion.hpp"
#include "vqkit/error.hpp"
#include "vqkit/opinion.hpp"
#include "vqkit/pmod.hpp"
#include "vqkit/rng.hpp"

namespace vqkit {

enum class TaskKind { Distribution, Pair, Distortion, Depict };

inline const char* task_name(TaskKind t) {
    switch (t) {
        case TaskKind::Distribution: return "distribution";
        case TaskKind::Pair:         return "pair";
        case TaskKind::Distortion:   return "distortion";
        case TaskKind::Depict:       return "depict";
    }
    return "?";
}

inline TaskKind parse_task(const std::string& s) {
    if (s == "distribution") return TaskKind::Distribution;
    if (s == "pair") return TaskKind::Pair;
    if (s == "distortion") return TaskKind::Distortion;
    if (s == "depict") return TaskKind::Depict;
    throw Error(ErrorCode::InvalidArgument, "unknown task '" + s + "'");
}

/// One training-ready vision-language pair.
struct VLPairRecord {
    std::string record_id;
    std::string media_ref;
    Modality modality = Modality::Image;
    TaskKind task = TaskKind::Distribution;
    std::string prompt;
    std::string target;
    std::optional<Pmod> pmod_payload;       // distribution task
    std::optional<PairLabel> pair_payload;  // pair task
    std::optional<std::string> pair_ref;    // pair task: second media

    void validate() const {
        if (record_id.empty() || media_ref.empty()) {
            throw Error(ErrorCode::InvalidArgument, "record needs record_id and media_ref");
        }
        if (task == TaskKind::Pair && (!pair_ref || !pair_payload)) {
            throw Error(ErrorCode::InvalidArgument,
                        "pair record '" + record_id + "' needs pair_ref and a pair label");
        }
        if (task == TaskKind::Distribution && !pmod_payload) {
            throw Error(ErrorCode::InvalidArgument,
                        "distribution record '" + record_id + "' needs a pmod payload");
        }
    }
};

inline const char* severity_name(DistortionCategory category, int severity) {
    static constexpr std::array<const char*, 5> kSpatial{
        "mild", "noticeable", "relatively severe", "severe", "very severe"};
    static constexpr std::array<const char*, 3> kVideo{"mild", "noticeable", "severe"};
    DistortionSpec{category, severity, 0}.validate();
    return is_video_category(category) ? kVideo[severity - 1] : kSpatial[severity - 1];
}

/// "The quality of the image/video is [level]." with the level read from the
/// distribution's target mean.
inline VLPairRecord make_scoring_record(const std::string& item_id, const std::string& media_ref,
                                        Modality modality, const Pmod& pmod) {
    VLPairRecord record;
    record.record_id = item_id + ":distribution";
    record.media_ref = media_ref;
    record.modality = modality;
    record.task = TaskKind::Distribution;
    record.prompt = modality == Modality::Image ? "[image]" : "[video]";
    record.target = std::string("The quality of the ") + modality_name(modality) + " is " +
                    level_name(level_of(pmod.target_mu)) + ".";
    record.pmod_payload = pmod;
    return record;
}

/// "[severity level]–[distortion type]" (en dash).
inline VLPairRecord make_distortion_record(const std::string& item_id, const std::string& media_ref,
                                           Modality modality, const DistortionSpec& spec) {
    spec.validate();
    VLPairRecord record;
    record.record_id = item_id + ":distortion";
    record.media_ref = media_ref;
    record.modality = modality;
    record.task = TaskKind::Distortion;
    record.prompt = modality == Modality::Image ? "[image]" : "[video]";
    record.target = std::string(severity_name(spec.category, spec.severity)) + "\xE2\x80\x93" +
                    category_name(spec.category);
    return record;
}

/// Pair records carry the label in the payload only; pairwise training
/// supervises level logits, so there is no text target.
inline VLPairRecord make_pair_record(const std::string& record_id, const std::string& media_ref,
                                     const std::string& pair_ref, Modality modality,
                                     const PairLabel& label) {
    VLPairRecord record;
    record.record_id = record_id;
    record.media_ref = media_ref;
    record.pair_ref = pair_ref;
    record.modality = modality;
    record.task = TaskKind::Pair;
    const char* placeholder = modality == Modality::Image ? "[image]" : "[video]";
    record.prompt = std::string(placeholder) + " " + placeholder;
    record.pair_payload = label;
    return record;
}

inline VLPairRecord make_depict_record(const std::string& item_id, const std::string& media_ref,
                                       Modality modality, const std::string& statement) {
    VLPairRecord record;
    record.record_id = item_id + ":depict";
    record.media_ref = media_ref;
    record.modality = modality;
    record.task = TaskKind::Depict;
    record.prompt = modality == Modality::Image ? "[image]" : "[video]";
    record.target = statement;
    return record;
}

// ---------------------------------------------------------------------------
// Judge protocol

struct JudgeVerdict {
    int score = 2;  // 0, 1, or 2
    std::optional<std::string> revision;  // required when score == 1
    std::optional<std::string> reason;    // required when score == 0

    void validate() const {
        if (score < 0 || score > 2) {
            throw Error(ErrorCode::InvalidArgument, "judge score must be 0, 1 or 2");
        }
        if (score == 1 && !revision) {
            throw Error(ErrorCode::InvalidArgument, "score-1 verdict must carry a revision");
        }
        if (score == 0 && !reason) {
            throw Error(ErrorCode::InvalidArgument, "score-0 verdict must carry a reason");
        }
    }
};

/// Side-effect-free judging backend (three-level verdicts plus binary
/// re-checks for the self-judge stage).
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual JudgeVerdict evaluate(const std::string& statement, const std::string& media_ref,
                                  int round_index) = 0;
    virtual bool binary_judge(const std::string& statement, const std::string& media_ref,
                              int round_index) = 0;
};

/// Deterministic stand-in for the proprietary judges: verdicts are a pure
/// hash of (seed, statement, media, round) with configurable score odds.
class MockJudge : public JudgeBackend {
public:
    explicit MockJudge(uint64_t seed, double p_score2 = 0.9, double p_score1 = 0.05)
        : seed_(seed), p_score2_(p_score2), p_score1_(p_score1) {}

    JudgeVerdict evaluate(const std::string& statement, const std::string& media_ref,
                          int round_index) override {
        Rng rng(draw_seed(statement, media_ref, round_index, "evaluate"));
        const double u = rng.uniform();
        if (u < p_score2_) return {2, std::nullopt, std::nullopt};
        if (u < p_score2_ + p_score1_) {
            return {1, "(revised) " + statement, std::nullopt};
        }
        return {0, std::nullopt, std::string("statement inconsistent with ") + media_ref};
    }

    bool binary_judge(const std::string& statement, const std::string& media_ref,
                      int round_index) override {
        Rng rng(draw_seed(statement, media_ref, round_index, "binary"));
        return rng.uniform() < 0.95;
    }

private:
    uint64_t draw_seed(const std::string& statement, const std::string& media_ref, int round,
                       const char* kind) const {
        return derive_seed(derive_seed(seed_, statement, kind), media_ref,
                           std::to_string(round));
    }

    uint64_t seed_;
    double p_score2_;
    double p_score1_;
};

struct ScrutinyResult {
    bool accepted = false;
    std::string text;    // original or judge-supplied revision
    std::string reason;  // populated when discarded
};

/// Three voting rounds across all judges. Any 0 discards immediately. If
/// every verdict is a 2 the original text is accepted. A 1 contributes its
/// revision: after the rounds complete, the first revision is adopted and
/// must pass the proposing judge's self-judge to be accepted (one revision
/// cycle at most).
inline bool self_judge(const std::string& statement, const std::string& media_ref,
                       JudgeBackend& judge, int rounds = 3);

inline ScrutinyResult scrutinize_statement(const std::string& statement,
                                           const std::string& media_ref,
                                           std::vector<JudgeBackend*> judges, int rounds = 3) {
    if (judges.empty()) {
        throw Error(ErrorCode::InvalidArgument, "scrutinize_statement needs at least one judge");
    }
    JudgeBackend* revising_judge = nullptr;
    std::optional<std::string> revision;
    for (int round = 0; round < rounds; ++round) {
        for (JudgeBackend* judge : judges) {
            const JudgeVerdict verdict = judge->evaluate(statement, media_ref, round);
            verdict.validate();
            if (verdict.score == 0) {
                return {false, statement, *verdict.reason};
            }
            if (verdict.score == 1 && !revision) {
                revision = verdict.revision;
                revising_judge = judge;
            }
        }
    }
    if (!revision) {
        return {true, statement, {}};
    }
    if (self_judge(*revision, media_ref, *revising_judge, rounds)) {
        return {true, *revision, {}};
    }
    return {false, statement, "revision rejected by self-judge"};
}

/// True iff all rounds answer positively. All rounds are always invoked; the
/// round index selects among the structurally varied prompt forms.
inline bool self_judge(const std::string& statement, const std::string& media_ref,
                       JudgeBackend& judge, int rounds) {
    bool all_positive = true;
    for (int round = 0; round < rounds; ++round) {
        if (!judge.binary_judge(statement, media_ref, round)) all_positive = false;
    }
    return all_positive;
}

// ---------------------------------------------------------------------------
// Pair sampling

struct SampledPair {
    std::string first_id;
    std::string second_id;
    PairLabel label;
};

struct PairStratumCounts {
    int better = 0;
    int worse = 0;
    int tie = 0;
};

class PairBudgetExhausted : public Error {
public:
    PairBudgetExhausted(PairStratumCounts achieved_counts, PairStratumCounts requested_counts)
        : Error(ErrorCode::PairBudgetExhausted,
                "pair sampling budget exhausted: achieved " +
                    std::to_string(achieved_counts.better) + ":" +
                    std::to_string(achieved_counts.worse) + ":" +
                    std::to_string(achieved_counts.tie) + " of requested " +
                    std::to_string(requested_counts.better) + ":" +
                    std::to_string(requested_counts.worse) + ":" +
                    std::to_string(requested_counts.tie)),
          achieved(achieved_counts),
          requested(requested_counts) {}

    PairStratumCounts achieved;
    PairStratumCounts requested;
};

/// Stratified preference-pair sampling at the given better:worse:tie ratio.
/// Rejection sampling with a 50x budget; unordered pairs never repeat and an
/// item is never paired with itself. Deterministic under the seed.
inline std::vector<SampledPair> sample_pairs(const std::vector<OpinionSummary>& summaries,
                                             int count, std::array<int, 3> ratio, uint64_t seed) {
    if (summaries.size() < 2 || count <= 0) {
        throw Error(ErrorCode::InvalidArgument, "sample_pairs needs >= 2 items and count > 0");
    }
    const int ratio_sum = ratio[0] + ratio[1] + ratio[2];
    if (ratio_sum <= 0) {
        throw Error(ErrorCode::InvalidArgument, "sample_pairs ratio must be positive");
    }
    // largest-remainder apportionment of count across the three strata
    std::array<int, 3> quota{};
    std::array<double, 3> remainder{};
    int assigned = 0;
    for (int s = 0; s < 3; ++s) {
        const double exact = static_cast<double>(count) * ratio[s] / ratio_sum;
        quota[s] = static_cast<int>(std::floor(exact));
        remainder[s] = exact - quota[s];
        assigned += quota[s];
    }
    while (assigned < count) {
        const int s = static_cast<int>(std::max_element(remainder.begin(), remainder.end()) -
                                       remainder.begin());
        ++quota[s];
        remainder[s] = -1.0;
        ++assigned;
    }
    PairStratumCounts want{quota[0], quota[1], quota[2]};

    Rng rng(derive_seed(seed, "", "pair-sampling"));
    PairStratumCounts have;
    std::set<std::pair<size_t, size_t>> used;
    std::vector<SampledPair> out;
    out.reserve(count);

    const long budget = 50L * count;
    for (long draw = 0; draw < budget && static_cast<int>(out.size()) < count; ++draw) {
        const size_t i = static_cast<size_t>(rng.uniform_int(0, summaries.size() - 1));
        const size_t j = static_cast<size_t>(rng.uniform_int(0, summaries.size() - 1));
        if (i == j) continue;
        const auto key = std::minmax(i, j);
        if (used.count(key)) continue;

        const PairLabel label = pairwise_label(summaries[i], summaries[j]);
        if (label.p_true == 0.5) {
            if (have.tie >= want.tie) continue;
            used.insert(key);
            out.push_back({summaries[i].item_id, summaries[j].item_id, label});
            ++have.tie;
        } else {
            // a strict pair fills either stratum by orientation
            const size_t winner = label.p_true == 1.0 ? i : j;
            const size_t loser = label.p_true == 1.0 ? j : i;
            if (have.better < want.better) {
                used.insert(key);
                out.push_back({summaries[winner].item_id, summaries[loser].item_id, PairLabel{1.0}});
                ++have.better;
            } else if (have.worse < want.worse) {
                used.insert(key);
                out.push_back({summaries[loser].item_id, summaries[winner].item_id, PairLabel{0.0}});
                ++have.worse;
            }
        }
    }
    if (static_cast<int>(out.size()) < count) {
        throw PairBudgetExhausted(have, want);
    }
    return out;
}

/// Exact-name train/test collisions, sorted.
inline std::vector<std::string> overlap_check(const std::set<std::string>& train_ids,
                                              const std::set<std::string>& test_ids) {
    std::vector<std::string> collisions;
    std::set_intersection(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(),
                          std::back_inserter(collisions));
    return collisions;
}

// ---------------------------------------------------------------------------
// Manifest I/O (JSONL, fixed key order)

inline nlohmann::ordered_json record_to_json(const VLPairRecord& record) {
    record.validate();
    nlohmann::ordered_json j;
    j["record_id"] = record.record_id;
    j["media_ref"] = record.media_ref;
    j["modality"] = modality_name(record.modality);
    j["task"] = task_name(record.task);
    j["prompt"] = record.prompt;
    j["target"] = record.target;
    if (record.pmod_payload) {
        j["payload"] = {{"probs", record.pmod_payload->probs},
                        {"target_mu", record.pmod_payload->target_mu},
                        {"level", level_name(level_of(record.pmod_payload->target_mu))}};
    } else if (record.pair_payload) {
        j["payload"] = {{"p_true", record.pair_payload->p_true}};
    }
    if (record.pair_ref) j["pair_ref"] = *record.pair_ref;
    return j;
}

inline VLPairRecord record_from_json(const nlohmann::ordered_json& j) {
    VLPairRecord record;
    record.record_id = j.at("record_id").get<std::string>();
    record.media_ref = j.at("media_ref").get<std::string>();
    record.modality = parse_modality(j.at("modality").get<std::string>());
    record.task = parse_task(j.at("task").get<std::string>());
    record.prompt = j.at("prompt").get<std::string>();
    record.target = j.at("target").get<std::string>();
    if (j.contains("payload")) {
        const auto& payload = j.at("payload");
        if (payload.contains("probs")) {
            Pmod pmod;
            const auto probs = payload.at("probs").get<std::vector<double>>();
            if (probs.size() != 5) {
                throw Error(ErrorCode::InvalidArgument, "pmod payload needs 5 probabilities");
            }
            std::copy(probs.begin(), probs.end(), pmod.probs.begin());
            pmod.target_mu = payload.at("target_mu").get<double>();
            record.pmod_payload = pmod;
        } else if (payload.contains("p_true")) {
            record.pair_payload = PairLabel{payload.at("p_true").get<double>()};
        }
    }
    if (j.contains("pair_ref")) record.pair_ref = j.at("pair_ref").get<std::string>();
    record.validate();
    return record;
}

/// One JSON object per line, UTF-8, fixed key order. Returns records written.
inline size_t write_manifest(const std::vector<VLPairRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open manifest for writing: " + path);
    }
    for (const auto& record : records) {
        out << record_to_json(record).dump() << "\n";
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "manifest write failed: " + path);
    }
    return records.size();
}

/// Reads a manifest, skipping an optional leading header line (an object
/// with a "manifest" key, as emitted by the CLI for provenance).
inline std::vector<VLPairRecord> read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open manifest: " + path);
    }
    std::vector<VLPairRecord> records;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::IoError, "manifest parse error in " + path + ": " + e.what());
        }
        if (first && j.contains("manifest")) {
            first = false;
            continue;  // provenance header
        }
        first = false;
        records.push_back(record_from_json(j));
    }
    return records;
}

}  // namespace vqkit

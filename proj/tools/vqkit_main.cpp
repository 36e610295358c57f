// vqkit command-line front end: thin argument parsing and file I/O over the
// library. Every subcommand is a pure function of (config, inputs, seed);
// JSONL outputs start with a provenance header echoing the effective config.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vqkit/dataset.hpp"
#include "vqkit/distortion.hpp"
#include "vqkit/http_judge.hpp"
#include "vqkit/image_io.hpp"
#include "vqkit/losses.hpp"
#include "vqkit/metrics.hpp"
#include "vqkit/opinion.hpp"
#include "vqkit/parallel.hpp"
#include "vqkit/pmod.hpp"
#include "vqkit/rng.hpp"
#include "vqkit/simulate.hpp"
#include "vqkit/stats.hpp"
#include "vqkit/video_codec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct PipelineConfig {
    uint64_t seed = 0;
    std::array<int, 3> ratio{4, 4, 2};
    std::string judges = "mock";
    std::string ladder_path;  // empty -> built-in defaults

    static PipelineConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw vqkit::Error(vqkit::ErrorCode::IoError, "cannot open config: " + path);
        }
        json doc;
        in >> doc;
        PipelineConfig config;
        if (doc.contains("seed")) config.seed = doc.at("seed").get<uint64_t>();
        if (doc.contains("ratio")) {
            const auto r = doc.at("ratio").get<std::vector<int>>();
            if (r.size() != 3) {
                throw vqkit::Error(vqkit::ErrorCode::InvalidArgument, "config ratio needs 3 ints");
            }
            std::copy(r.begin(), r.end(), config.ratio.begin());
        }
        if (doc.contains("judges")) config.judges = doc.at("judges").get<std::string>();
        if (doc.contains("ladder")) config.ladder_path = doc.at("ladder").get<std::string>();
        return config;
    }

    ordered_json echo() const {
        ordered_json j;
        j["seed"] = seed;
        j["ratio"] = {ratio[0], ratio[1], ratio[2]};
        j["judges"] = judges;
        j["ladder"] = ladder_path.empty() ? "default" : ladder_path;
        return j;
    }
};

std::string header_line(const PipelineConfig& config) {
    ordered_json j;
    j["manifest"] = "vqkit";
    j["version"] = 1;
    j["config"] = config.echo();
    return j.dump();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw vqkit::Error(vqkit::ErrorCode::IoError, "cannot open output: " + path);
    }
    return out;
}

std::array<int, 3> parse_ratio(const std::string& text) {
    std::array<int, 3> ratio{};
    char sep1 = 0, sep2 = 0;
    std::istringstream in(text);
    if (!(in >> ratio[0] >> sep1 >> ratio[1] >> sep2 >> ratio[2]) || sep1 != ':' || sep2 != ':') {
        throw vqkit::Error(vqkit::ErrorCode::InvalidArgument,
                           "ratio must look like 4:4:2, got '" + text + "'");
    }
    return ratio;
}

vqkit::SeverityLadder load_ladder(const PipelineConfig& config) {
    return config.ladder_path.empty() ? vqkit::SeverityLadder::defaults()
                                      : vqkit::SeverityLadder::from_json_file(config.ladder_path);
}

// ---------------------------------------------------------------------------
// opinion tables and summaries on disk

struct SummaryRow {
    vqkit::OpinionSummary summary;
    vqkit::Modality modality = vqkit::Modality::Image;
    std::string media_ref;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

vqkit::RawOpinionTable load_opinion_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw vqkit::Error(vqkit::ErrorCode::IoError, "cannot open table: " + path);
    }
    vqkit::RawOpinionTable table;
    const std::string ext = fs::path(path).extension().string();
    std::string line;
    if (ext == ".jsonl") {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            vqkit::OpinionItem item;
            item.item_id = j.at("item_id").get<std::string>();
            item.modality = vqkit::parse_modality(j.value("modality", "image"));
            for (const auto& [annotator, score] : j.at("scores").items()) {
                item.scores[annotator] = score.get<double>();
            }
            table.items.push_back(std::move(item));
        }
        return table;
    }
    // CSV: item_id,modality,<annotator...>
    if (!std::getline(in, line)) {
        throw vqkit::Error(vqkit::ErrorCode::InvalidTable, "empty CSV table: " + path);
    }
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "item_id" || header[1] != "modality") {
        throw vqkit::Error(vqkit::ErrorCode::InvalidTable,
                           "CSV header must start with item_id,modality");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw vqkit::Error(vqkit::ErrorCode::InvalidTable,
                               "CSV row width mismatch at item '" + fields.front() + "'");
        }
        vqkit::OpinionItem item;
        item.item_id = fields[0];
        item.modality = vqkit::parse_modality(fields[1]);
        for (size_t c = 2; c < fields.size(); ++c) {
            item.scores[header[c]] = std::stod(fields[c]);
        }
        table.items.push_back(std::move(item));
    }
    return table;
}

void write_summaries(const std::vector<SummaryRow>& rows, const std::string& path,
                     const PipelineConfig& config) {
    auto out = open_output(path);
    out << header_line(config) << "\n";
    for (const auto& row : rows) {
        ordered_json j;
        j["item_id"] = row.summary.item_id;
        j["media_ref"] = row.media_ref;
        j["modality"] = vqkit::modality_name(row.modality);
        j["mu"] = row.summary.mu;
        j["sigma"] = row.summary.sigma;
        j["n"] = row.summary.n;
        out << j.dump() << "\n";
    }
}

std::vector<SummaryRow> load_summaries(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw vqkit::Error(vqkit::ErrorCode::IoError, "cannot open summaries: " + path);
    }
    std::vector<SummaryRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (first && j.contains("manifest")) {
            first = false;
            continue;
        }
        first = false;
        SummaryRow row;
        row.summary.item_id = j.at("item_id").get<std::string>();
        row.summary.mu = j.at("mu").get<double>();
        row.summary.sigma = j.at("sigma").get<double>();
        row.summary.n = j.value("n", 1);
        row.modality = vqkit::parse_modality(j.value("modality", "image"));
        row.media_ref = j.value("media_ref", row.summary.item_id);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// subcommand bodies

int run_fuse(const std::string& table_path, const std::string& calib_path,
             const std::string& out_path, bool allow_ragged, PipelineConfig config) {
    vqkit::RawOpinionTable table = load_opinion_table(table_path);
    table.allow_ragged_annotators = allow_ragged;

    vqkit::CalibrationSet calibrations;
    for (const auto& item : table.items) {
        for (const auto& [annotator, score] : item.scores) {
            calibrations.emplace(annotator, vqkit::AnnotatorCalibration::identity());
        }
    }
    if (!calib_path.empty()) {
        std::ifstream in(calib_path);
        if (!in) {
            throw vqkit::Error(vqkit::ErrorCode::IoError, "cannot open calib: " + calib_path);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const auto annotator = j.at("annotator_id").get<std::string>();
            const auto pred = j.at("pred").get<std::vector<double>>();
            const auto gt = j.at("gt").get<std::vector<double>>();
            const vqkit::SigmoidFit fit = vqkit::fit_sigmoid_map(pred, gt);
            calibrations[annotator] = vqkit::AnnotatorCalibration::sigmoid(fit.params);
            std::cerr << "calibrated " << annotator << " rmse=" << fit.rmse << "\n";
        }
    }

    const auto summaries = vqkit::summarize_opinions(table, calibrations);
    std::vector<SummaryRow> rows;
    for (size_t i = 0; i < summaries.size(); ++i) {
        rows.push_back({summaries[i], table.items[i].modality, table.items[i].item_id});
    }
    write_summaries(rows, out_path, config);
    std::cout << "wrote " << rows.size() << " summaries to " << out_path << "\n";
    return 0;
}

ordered_json pmod_json(const vqkit::Pmod& pmod) {
    ordered_json j;
    j["probs"] = pmod.probs;
    j["target_mu"] = pmod.target_mu;
    j["level"] = vqkit::level_name(vqkit::level_of(pmod.target_mu));
    return j;
}

int run_pmod(std::optional<double> mu, std::optional<double> sigma,
             const std::string& summaries_path, const std::string& out_path,
             const PipelineConfig& config) {
    if (mu) {
        const vqkit::Pmod pmod = vqkit::build_pmod({"cli", *mu, sigma.value_or(0.0), 1});
        std::cout << pmod_json(pmod).dump() << "\n";
        return 0;
    }
    if (summaries_path.empty() || out_path.empty()) {
        throw vqkit::Error(vqkit::ErrorCode::InvalidArgument,
                           "pmod needs either --mu [--sigma] or --summaries with --out");
    }
    const auto rows = load_summaries(summaries_path);
    auto out = open_output(out_path);
    out << header_line(config) << "\n";
    for (const auto& row : rows) {
        ordered_json j;
        j["item_id"] = row.summary.item_id;
        const vqkit::Pmod pmod = vqkit::build_pmod(row.summary);
        j.update(pmod_json(pmod));
        out << j.dump() << "\n";
    }
    std::cout << "wrote " << rows.size() << " pmods to " << out_path << "\n";
    return 0;
}

// Pairs never cross modalities: the count is split across the present
// modalities in proportion to their item counts, and each group is sampled
// independently at the configured ratio.
std::vector<vqkit::SampledPair> sample_pairs_by_modality(const std::vector<SummaryRow>& rows,
                                                         int count,
                                                         const PipelineConfig& config) {
    std::map<vqkit::Modality, std::vector<vqkit::OpinionSummary>> groups;
    for (const auto& row : rows) groups[row.modality].push_back(row.summary);

    std::vector<vqkit::SampledPair> pairs;
    int assigned = 0;
    size_t group_index = 0;
    for (const auto& [modality, summaries] : groups) {
        ++group_index;
        const bool last = group_index == groups.size();
        const int group_count =
            last ? count - assigned
                 : static_cast<int>(std::lround(static_cast<double>(count) * summaries.size() /
                                                rows.size()));
        assigned += group_count;
        if (group_count <= 0) continue;
        const auto group_pairs = vqkit::sample_pairs(
            summaries, group_count, config.ratio,
            vqkit::derive_seed(config.seed, vqkit::modality_name(modality), "pairs"));
        pairs.insert(pairs.end(), group_pairs.begin(), group_pairs.end());
    }
    return pairs;
}

int run_pair_labels(const std::string& summaries_path, int count, const std::string& ratio_text,
                    const std::string& out_path, PipelineConfig config) {
    if (!ratio_text.empty()) config.ratio = parse_ratio(ratio_text);
    const auto rows = load_summaries(summaries_path);
    const auto pairs = sample_pairs_by_modality(rows, count, config);
    auto out = open_output(out_path);
    out << header_line(config) << "\n";
    for (const auto& pair : pairs) {
        ordered_json j;
        j["first_id"] = pair.first_id;
        j["second_id"] = pair.second_id;
        j["p_true"] = pair.label.p_true;
        out << j.dump() << "\n";
    }
    std::cout << "wrote " << pairs.size() << " pairs to " << out_path << "\n";
    return 0;
}

int run_distort(const std::string& input, const std::string& category_token, int severity,
                const std::string& output, PipelineConfig config) {
    const auto category = vqkit::parse_category(category_token);
    if (!category) {
        throw vqkit::Error(vqkit::ErrorCode::InvalidSpec,
                           "unknown category '" + category_token + "'");
    }
    const auto ladder = load_ladder(config);
    const vqkit::DistortionSpec spec{*category, severity, config.seed};
    spec.validate();

    const bool input_is_dir = fs::is_directory(input);
    if (vqkit::is_video_category(*category) && !input_is_dir) {
        throw vqkit::Error(vqkit::ErrorCode::InvalidSpec,
                           std::string("'") + vqkit::category_name(*category) +
                               "' needs a frame directory input");
    }

    if (!input_is_dir) {
        const vqkit::ImageBuffer img = vqkit::read_image(input);
        vqkit::ImageBuffer out;
        if (*category == vqkit::DistortionCategory::Jpeg2000Compression) {
            const fs::path work = fs::path(output).parent_path() / ".vqkit_jp2_work";
            out = vqkit::jpeg2000_roundtrip_external(img, severity, work.string(), ladder);
            fs::remove_all(work);
        } else {
            out = vqkit::apply_spatial_distortion(img, spec, ladder);
        }
        vqkit::write_image(out, output);
        std::cout << "wrote " << output << "\n";
        return 0;
    }

    const vqkit::FrameSequence seq = vqkit::read_frame_dir(input);
    vqkit::FrameSequence out;
    switch (*category) {
        case vqkit::DistortionCategory::Stuttering:
            out = vqkit::apply_stutter(seq, severity, config.seed, ladder);
            break;
        case vqkit::DistortionCategory::CameraShake:
            out = vqkit::apply_camera_shake(seq, severity, config.seed, ladder);
            break;
        case vqkit::DistortionCategory::H264Compression:
        case vqkit::DistortionCategory::H265Compression: {
            const fs::path work = fs::path(output) / ".vqkit_codec_work";
            const auto codec = *category == vqkit::DistortionCategory::H264Compression
                                   ? vqkit::VideoCodec::H264
                                   : vqkit::VideoCodec::H265;
            out = vqkit::encode_video_external(seq, codec, severity, work.string(), ladder);
            fs::remove_all(work);
            break;
        }
        default:
            out = vqkit::apply_spatial_to_sequence(seq, spec, ladder);
            break;
    }
    vqkit::write_frame_dir(out, output);
    std::cout << "wrote " << out.frames.size() << " frames to " << output << "\n";
    return 0;
}

ordered_json report_json(const vqkit::MetricReport& report) {
    ordered_json j;
    j["blockiness"] = report.blockiness;
    j["blur_cpbd"] = report.blur_cpbd;
    if (report.blur_no_edges) j["blur_no_edges"] = true;
    j["contrast"] = report.contrast;
    j["noise"] = report.noise;
    j["colourfulness"] = report.colourfulness;
    j["luminance"] = report.luminance;
    j["spatial_info"] = report.spatial_info;
    if (report.flicker) j["flicker"] = *report.flicker;
    if (report.temporal_info) j["temporal_info"] = *report.temporal_info;
    return j;
}

vqkit::MetricReport compute_report_for_path(const std::string& path) {
    if (fs::is_directory(path)) {
        return vqkit::metric_report(vqkit::read_frame_dir(path));
    }
    return vqkit::metric_report(vqkit::read_image(path));
}

int run_metrics(const std::string& input, const std::string& batch_list,
                const std::string& out_path, const PipelineConfig& config) {
    if (batch_list.empty()) {
        const auto report = compute_report_for_path(input);
        ordered_json j;
        j["input"] = input;
        j.update(report_json(report));
        if (out_path.empty()) {
            std::cout << j.dump() << "\n";
        } else {
            open_output(out_path) << j.dump() << "\n";
        }
        return 0;
    }
    std::ifstream list(batch_list);
    if (!list) {
        throw vqkit::Error(vqkit::ErrorCode::IoError, "cannot open batch list: " + batch_list);
    }
    std::vector<std::string> paths;
    std::string line;
    while (std::getline(list, line)) {
        if (!line.empty()) paths.push_back(line);
    }
    // parallel map over items, output strictly in input order
    const auto reports = vqkit::parallel_map<vqkit::MetricReport>(
        paths.size(), [&](size_t i) { return compute_report_for_path(paths[i]); });
    auto out = open_output(out_path);
    out << header_line(config) << "\n";
    for (size_t i = 0; i < paths.size(); ++i) {
        ordered_json j;
        j["input"] = paths[i];
        j.update(report_json(reports[i]));
        out << j.dump() << "\n";
    }
    std::cout << "wrote " << paths.size() << " reports to " << out_path << "\n";
    return 0;
}

std::vector<double> load_number_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw vqkit::Error(vqkit::ErrorCode::IoError, "cannot open " + path);
    }
    std::vector<double> values;
    double v = 0.0;
    while (in >> v) values.push_back(v);
    return values;
}

int run_eval(const std::string& pred_path, const std::string& gt_path) {
    const auto pred = load_number_file(pred_path);
    const auto gt = load_number_file(gt_path);
    ordered_json j;
    j["srcc"] = vqkit::srcc(pred, gt);
    j["plcc"] = vqkit::plcc(pred, gt);
    j["fitted_plcc"] = vqkit::fitted_plcc(pred, gt);
    j["n"] = pred.size();
    std::cout << j.dump() << "\n";
    return 0;
}

int run_dataset(const std::string& summaries_path, int pairs_count, const std::string& ratio_text,
                const std::string& distortions_path, const std::string& statements_path,
                const std::string& out_path, PipelineConfig config) {
    if (!ratio_text.empty()) config.ratio = parse_ratio(ratio_text);
    const auto rows = load_summaries(summaries_path);

    std::vector<vqkit::VLPairRecord> records;
    std::map<std::string, const SummaryRow*> by_id;
    for (const auto& row : rows) {
        records.push_back(vqkit::make_scoring_record(row.summary.item_id, row.media_ref,
                                                     row.modality, vqkit::build_pmod(row.summary)));
        by_id[row.summary.item_id] = &row;
    }

    if (pairs_count > 0) {
        const auto pairs = sample_pairs_by_modality(rows, pairs_count, config);
        for (size_t i = 0; i < pairs.size(); ++i) {
            const auto& first = *by_id.at(pairs[i].first_id);
            const auto& second = *by_id.at(pairs[i].second_id);
            records.push_back(vqkit::make_pair_record("pair" + std::to_string(i), first.media_ref,
                                                      second.media_ref, first.modality,
                                                      pairs[i].label));
        }
    }

    if (!distortions_path.empty()) {
        std::ifstream in(distortions_path);
        if (!in) {
            throw vqkit::Error(vqkit::ErrorCode::IoError,
                               "cannot open distortions: " + distortions_path);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const auto category = vqkit::parse_category(j.at("category").get<std::string>());
            if (!category) {
                throw vqkit::Error(vqkit::ErrorCode::InvalidSpec,
                                   "unknown category in distortions file");
            }
            const vqkit::DistortionSpec spec{*category, j.at("severity").get<int>(), config.seed};
            const auto item_id = j.at("item_id").get<std::string>();
            records.push_back(vqkit::make_distortion_record(
                item_id, j.value("media_ref", item_id),
                vqkit::parse_modality(j.value("modality", "image")), spec));
        }
    }

    size_t accepted = 0, discarded = 0, deferred = 0;
    if (!statements_path.empty()) {
        std::ifstream in(statements_path);
        if (!in) {
            throw vqkit::Error(vqkit::ErrorCode::IoError,
                               "cannot open statements: " + statements_path);
        }
        std::unique_ptr<vqkit::HttpJudge> http;
        std::vector<std::unique_ptr<vqkit::MockJudge>> mocks;
        std::vector<vqkit::JudgeBackend*> judges;
        vqkit::JudgeBackend* annotator_judge = nullptr;
        if (config.judges == "http") {
            http = std::make_unique<vqkit::HttpJudge>();
            judges = {http.get()};
            annotator_judge = http.get();
        } else {
            for (int k = 0; k < 3; ++k) {
                mocks.push_back(std::make_unique<vqkit::MockJudge>(config.seed + k));
            }
            for (auto& m : mocks) judges.push_back(m.get());
            annotator_judge = judges.front();
        }

        std::ofstream deferred_out;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const auto item_id = j.at("item_id").get<std::string>();
            const auto media_ref = j.value("media_ref", item_id);
            const auto statement = j.at("statement").get<std::string>();
            const auto modality = vqkit::parse_modality(j.value("modality", "image"));
            try {
                const auto result = vqkit::scrutinize_statement(statement, media_ref, judges);
                if (!result.accepted) {
                    ++discarded;
                    continue;
                }
                if (!vqkit::self_judge(result.text, media_ref, *annotator_judge)) {
                    ++discarded;
                    continue;
                }
                records.push_back(
                    vqkit::make_depict_record(item_id, media_ref, modality, result.text));
                ++accepted;
            } catch (const vqkit::Error& e) {
                if (e.code() != vqkit::ErrorCode::JudgeUnavailable) throw;
                if (!deferred_out.is_open()) deferred_out.open(out_path + ".deferred.jsonl");
                deferred_out << line << "\n";
                ++deferred;
            }
        }
    }

    {
        auto out = open_output(out_path);
        out << header_line(config) << "\n";
        for (const auto& record : records) {
            out << vqkit::record_to_json(record).dump() << "\n";
        }
    }
    std::cout << "wrote " << records.size() << " records to " << out_path;
    if (accepted || discarded) {
        std::cout << " (depict: " << accepted << " accepted, " << discarded << " discarded)";
    }
    std::cout << "\n";
    if (deferred > 0) {
        std::cerr << deferred << " statements deferred (judge unavailable), see " << out_path
                  << ".deferred.jsonl\n";
    }
    return 0;
}

int run_simulate(int n, const std::string& annotators_path, int trials, PipelineConfig config) {
    std::vector<vqkit::SynthAnnotatorSpec> specs;
    if (annotators_path.empty()) {
        // six near-identity annotators with moderate noise
        for (int a = 0; a < 6; ++a) {
            vqkit::SynthAnnotatorSpec spec;
            spec.warp = vqkit::near_identity_warp();
            spec.noise_sigma = 0.1;
            spec.seed = config.seed * 1000 + a;
            specs.push_back(spec);
        }
    } else {
        std::ifstream in(annotators_path);
        if (!in) {
            throw vqkit::Error(vqkit::ErrorCode::IoError,
                               "cannot open annotators: " + annotators_path);
        }
        json doc;
        in >> doc;
        for (const auto& a : doc) {
            vqkit::SynthAnnotatorSpec spec;
            spec.bias = a.value("bias", 0.0);
            spec.noise_sigma = a.value("noise_sigma", 0.1);
            spec.seed = a.value("seed", 0);
            if (a.contains("warp") && a.at("warp").is_object()) {
                const auto& w = a.at("warp");
                spec.warp = {w.at("gamma1").get<double>(), w.at("gamma2").get<double>(),
                             w.at("gamma3").get<double>(), w.at("gamma4").get<double>()};
            } else {
                spec.warp = vqkit::near_identity_warp();
            }
            spec.validate();
            specs.push_back(spec);
        }
    }

    ordered_json result;
    result["n"] = n;
    result["annotators"] = specs.size();
    result["trials"] = trials;
    ordered_json trials_json = ordered_json::array();
    int fusion_wins = 0;
    for (int t = 0; t < trials; ++t) {
        auto trial_specs = specs;
        if (t > 0) {
            for (auto& spec : trial_specs) {
                spec.seed = vqkit::derive_seed(spec.seed, std::to_string(t), "trial");
            }
        }
        const auto report = vqkit::run_fusion_experiment(n, trial_specs, config.seed + t);
        double max_individual = -1.0;
        for (double s : report.individual_srcc) max_individual = std::max(max_individual, s);
        fusion_wins += report.fused_srcc >= max_individual;
        ordered_json tj;
        tj["individual_srcc"] = report.individual_srcc;
        tj["fused_srcc"] = report.fused_srcc;
        tj["pmod_srcc"] = report.pmod_srcc;
        tj["pmod_vs_fused_srcc"] = report.pmod_vs_fused_srcc;
        trials_json.push_back(tj);
    }
    result["fusion_wins"] = fusion_wins;
    result["trials_detail"] = trials_json;
    std::cout << result.dump() << "\n";
    return 0;
}

// central finite differences against the analytic gradients
struct GradCheckRow {
    std::string name;
    int instances;
    double max_rel_err;
    bool pass;
};

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

int run_loss_check(int instances) {
    using namespace vqkit;
    const double h = 1e-6;
    const double tol = 1e-4;
    std::vector<GradCheckRow> rows;

    {
        Rng rng(101);
        double worst = 0.0;
        for (int t = 0; t < instances; ++t) {
            std::array<double, 5> p{};
            double sum = 0.0;
            for (auto& v : p) sum += (v = rng.uniform(0.01, 1.0));
            for (auto& v : p) v /= sum;
            LevelLogits z;
            for (auto& v : z.logits) v = rng.uniform(-3.0, 3.0);
            const auto grad = kl_div(p, softmax5(z)).grad_q_logits;
            for (int j = 0; j < 5; ++j) {
                LevelLogits hi = z, lo = z;
                hi.logits[j] += h;
                lo.logits[j] -= h;
                const double fd =
                    (kl_div(p, softmax5(hi)).value - kl_div(p, softmax5(lo)).value) / (2 * h);
                worst = std::max(worst, rel_err(grad[j], fd));
            }
        }
        rows.push_back({"kl_div", instances, worst, worst < tol});
    }
    {
        Rng rng(102);
        double worst = 0.0;
        for (int t = 0; t < instances; ++t) {
            Pmod target;
            double sum = 0.0;
            for (auto& v : target.probs) sum += (v = rng.uniform(0.01, 1.0));
            for (auto& v : target.probs) v /= sum;
            TokenTargetSequence seq;
            const int len = 2 + static_cast<int>(rng.uniform_int(0, 4));
            for (int i = 0; i < len; ++i) seq.target_probs.push_back(rng.uniform(0.05, 1.0));
            LevelLogits z;
            for (auto& v : z.logits) v = rng.uniform(-3.0, 3.0);
            const auto result = scoring_single_loss(seq, target, z);
            for (int j = 0; j < 5; ++j) {
                LevelLogits hi = z, lo = z;
                hi.logits[j] += h;
                lo.logits[j] -= h;
                const double fd = (scoring_single_loss(seq, target, hi).value -
                                   scoring_single_loss(seq, target, lo).value) /
                                  (2 * h);
                worst = std::max(worst, rel_err(result.grad_level_logits[j], fd));
            }
            for (int l = 0; l + 1 < len; ++l) {
                TokenTargetSequence hi = seq, lo = seq;
                hi.target_probs[l] += h;
                lo.target_probs[l] -= h;
                const double fd = (scoring_single_loss(hi, target, z).value -
                                   scoring_single_loss(lo, target, z).value) /
                                  (2 * h);
                worst = std::max(worst, rel_err(result.grad_prefix_probs[l], fd));
            }
        }
        rows.push_back({"scoring_single_loss", instances, worst, worst < tol});
    }
    {
        Rng rng(103);
        double worst = 0.0;
        const double labels[] = {0.0, 0.5, 1.0};
        for (int t = 0; t < instances; ++t) {
            const PairLabel label{labels[rng.uniform_int(0, 2)]};
            const double mu1 = rng.uniform(-3.0, 3.0), mu2 = rng.uniform(-3.0, 3.0);
            const auto result = pairwise_kl_loss(label, mu1, mu2);
            const double fd1 = (pairwise_kl_loss(label, mu1 + h, mu2).value -
                                pairwise_kl_loss(label, mu1 - h, mu2).value) /
                               (2 * h);
            const double fd2 = (pairwise_kl_loss(label, mu1, mu2 + h).value -
                                pairwise_kl_loss(label, mu1, mu2 - h).value) /
                               (2 * h);
            worst = std::max({worst, rel_err(result.grad_mu1, fd1), rel_err(result.grad_mu2, fd2)});
        }
        rows.push_back({"pairwise_kl_loss", instances, worst, worst < tol});
    }
    {
        Rng rng(104);
        double worst = 0.0;
        for (int t = 0; t < instances; ++t) {
            TokenTargetSequence seq;
            const int len = 1 + static_cast<int>(rng.uniform_int(0, 5));
            for (int i = 0; i < len; ++i) seq.target_probs.push_back(rng.uniform(0.05, 0.99));
            const auto result = focal_loss(seq);
            for (int l = 0; l < len; ++l) {
                TokenTargetSequence hi = seq, lo = seq;
                hi.target_probs[l] += h;
                lo.target_probs[l] -= h;
                const double fd = (focal_loss(hi).value - focal_loss(lo).value) / (2 * h);
                worst = std::max(worst, rel_err(result.grad_probs[l], fd));
            }
        }
        rows.push_back({"focal_loss", instances, worst, worst < tol});
    }

    bool all_pass = true;
    std::printf("%-22s %10s %14s %6s\n", "loss", "instances", "max_rel_err", "status");
    for (const auto& row : rows) {
        std::printf("%-22s %10d %14.3e %6s\n", row.name.c_str(), row.instances, row.max_rel_err,
                    row.pass ? "pass" : "FAIL");
        all_pass = all_pass && row.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vqkit: machine-opinion fusion, soft quality labels, distortion synthesis,\n"
                 "quality metrics and training-manifest tooling for visual quality assessment"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "pipeline config JSON (flags override file values)");

    // fuse
    auto* fuse = app.add_subcommand("fuse", "calibrate and fuse machine opinion tables");
    std::string fuse_table, fuse_calib, fuse_out = "summaries.jsonl";
    bool fuse_ragged = false;
    fuse->add_option("--table", fuse_table, "opinion table (.csv or .jsonl)")->required();
    fuse->add_option("--calib", fuse_calib, "per-annotator calibration data (.jsonl)");
    fuse->add_option("--out", fuse_out, "output summaries JSONL");
    fuse->add_flag("--allow-ragged", fuse_ragged, "permit differing annotator sets across items");

    // pmod
    auto* pmod = app.add_subcommand("pmod", "build five-level opinion distributions");
    std::optional<double> pmod_mu;
    std::optional<double> pmod_sigma;
    std::string pmod_summaries, pmod_out;
    pmod->add_option("--mu", pmod_mu, "single-sample mean in [0,1]");
    pmod->add_option("--sigma", pmod_sigma, "single-sample standard deviation");
    pmod->add_option("--summaries", pmod_summaries, "summaries JSONL input");
    pmod->add_option("--out", pmod_out, "output pmods JSONL");

    // pair-labels
    auto* pairs = app.add_subcommand("pair-labels", "sample stratified preference pairs");
    std::string pairs_summaries, pairs_ratio, pairs_out = "pairs.jsonl";
    int pairs_count = 0;
    uint64_t pairs_seed = 0;
    bool pairs_seed_set = false;
    pairs->add_option("--summaries", pairs_summaries, "summaries JSONL input")->required();
    pairs->add_option("--count", pairs_count, "number of pairs")->required();
    pairs->add_option("--ratio", pairs_ratio, "better:worse:tie ratio (default 4:4:2)");
    pairs->add_option("--seed", pairs_seed, "sampling seed")->each([&](const std::string&) {
        pairs_seed_set = true;
    });
    pairs->add_option("--out", pairs_out, "output pairs JSONL");

    // distort
    auto* distort = app.add_subcommand("distort", "apply a distortion to an image or clip");
    std::string distort_input, distort_category, distort_output, distort_ladder;
    int distort_severity = 1;
    uint64_t distort_seed = 0;
    bool distort_seed_set = false;
    distort->add_option("--input", distort_input, "image file or frame directory")->required();
    distort->add_option("--category", distort_category, "distortion category token")->required();
    distort->add_option("--severity", distort_severity, "severity level")->required();
    distort->add_option("--seed", distort_seed, "distortion seed")->each([&](const std::string&) {
        distort_seed_set = true;
    });
    distort->add_option("--output", distort_output, "output file or directory")->required();
    distort->add_option("--ladder", distort_ladder, "severity ladder JSON override");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "compute low-level quality metrics");
    std::string metrics_input, metrics_batch, metrics_out;
    metrics->add_option("--input", metrics_input, "image file or frame directory");
    metrics->add_option("--batch", metrics_batch, "text file listing inputs (one per line)");
    metrics->add_option("--out", metrics_out, "output file (JSONL for --batch)");

    // eval
    auto* eval = app.add_subcommand("eval", "correlation metrics between two score files");
    std::string eval_pred, eval_gt;
    eval->add_option("--pred", eval_pred, "predicted scores, whitespace-separated")->required();
    eval->add_option("--gt", eval_gt, "ground-truth scores")->required();

    // dataset
    auto* dataset = app.add_subcommand("dataset", "assemble a training manifest");
    std::string ds_summaries, ds_ratio, ds_distortions, ds_statements, ds_judges;
    std::string ds_out = "manifest.jsonl";
    int ds_pairs_count = 0;
    uint64_t ds_seed = 0;
    bool ds_seed_set = false;
    dataset->add_option("--summaries", ds_summaries, "summaries JSONL input")->required();
    dataset->add_option("--pairs-count", ds_pairs_count, "number of preference pairs to add");
    dataset->add_option("--ratio", ds_ratio, "better:worse:tie ratio (default 4:4:2)");
    dataset->add_option("--seed", ds_seed, "pipeline seed")->each([&](const std::string&) {
        ds_seed_set = true;
    });
    dataset->add_option("--distortions", ds_distortions, "applied-distortion records JSONL");
    dataset->add_option("--statements", ds_statements, "candidate statements JSONL");
    dataset->add_option("--judges", ds_judges, "judge backend: mock or http");
    dataset->add_option("--out", ds_out, "output manifest JSONL");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "synthetic fusion experiments");
    std::string sim_annotators;
    int sim_n = 500, sim_trials = 1;
    uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    simulate->add_option("--n", sim_n, "items per trial");
    simulate->add_option("--annotators", sim_annotators, "annotator spec JSON array");
    simulate->add_option("--trials", sim_trials, "number of trials");
    simulate->add_option("--seed", sim_seed, "experiment seed")->each([&](const std::string&) {
        sim_seed_set = true;
    });

    // loss-check
    auto* loss_check = app.add_subcommand("loss-check", "gradient checks for the loss kernels");
    int lc_instances = 1000;
    loss_check->add_option("--instances", lc_instances, "random instances per loss");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        PipelineConfig config =
            config_path.empty() ? PipelineConfig{} : PipelineConfig::from_file(config_path);
        if (fuse->parsed()) {
            return run_fuse(fuse_table, fuse_calib, fuse_out, fuse_ragged, config);
        }
        if (pmod->parsed()) {
            return run_pmod(pmod_mu, pmod_sigma, pmod_summaries, pmod_out, config);
        }
        if (pairs->parsed()) {
            if (pairs_seed_set) config.seed = pairs_seed;
            return run_pair_labels(pairs_summaries, pairs_count, pairs_ratio, pairs_out, config);
        }
        if (distort->parsed()) {
            if (distort_seed_set) config.seed = distort_seed;
            if (!distort_ladder.empty()) config.ladder_path = distort_ladder;
            return run_distort(distort_input, distort_category, distort_severity, distort_output,
                               config);
        }
        if (metrics->parsed()) {
            if (metrics_input.empty() && metrics_batch.empty()) {
                throw vqkit::Error(vqkit::ErrorCode::InvalidArgument,
                                   "metrics needs --input or --batch");
            }
            if (!metrics_batch.empty() && metrics_out.empty()) {
                throw vqkit::Error(vqkit::ErrorCode::InvalidArgument,
                                   "metrics --batch needs --out");
            }
            return run_metrics(metrics_input, metrics_batch, metrics_out, config);
        }
        if (eval->parsed()) {
            return run_eval(eval_pred, eval_gt);
        }
        if (dataset->parsed()) {
            if (ds_seed_set) config.seed = ds_seed;
            if (!ds_judges.empty()) config.judges = ds_judges;
            return run_dataset(ds_summaries, ds_pairs_count, ds_ratio, ds_distortions,
                               ds_statements, ds_out, config);
        }
        if (simulate->parsed()) {
            if (sim_seed_set) config.seed = sim_seed;
            return run_simulate(sim_n, sim_annotators, sim_trials, config);
        }
        if (loss_check->parsed()) {
            return run_loss_check(lc_instances);
        }
    } catch (const vqkit::Error& e) {
        json diag;
        diag["error"] = vqkit::to_string(e.code());
        diag["message"] = e.what();
        std::cerr << diag.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json diag;
        diag["error"] = "internal";
        diag["message"] = e.what();
        std::cerr << diag.dump() << "\n";
        return 1;
    }
    return 2;
}

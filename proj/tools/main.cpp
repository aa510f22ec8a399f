// texlat: texture statistics, hierarchical PPCA codes and synthesis.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "log.hpp"
#include "texlat/dataset.hpp"
#include "texlat/error.hpp"
#include "texlat/formats.hpp"
#include "texlat/hppca.hpp"
#include "texlat/pss.hpp"
#include "texlat/simd/kernels.hpp"
#include "texlat/synthesis.hpp"
#include "texlat/tss.hpp"

namespace fs = std::filesystem;
using namespace texlat;
using cli::Level;
using cli::log;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Options {
    // shared
    PssParams params;
    std::size_t jobs = 1;
    std::optional<std::size_t> size;
    std::uint64_t seed = 0;
    std::size_t iterations = 50;
    std::size_t patch = kDefaultPatch;
    double ccr = 0.99999999;
    std::size_t dim = 200;

    // paths and command-specific
    std::string input, model, output, image, code, archive, trace, spectrum, csv, per_image;
    std::string split = "train";
    std::optional<std::size_t> train_count, eval_count;
    std::vector<std::size_t> dims;
    std::vector<double> ccrs;
};

std::string csv_number(double v) { return format_double(v); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

DatasetManifest dataset_from(const Options& o) {
    DatasetManifest m = open_dataset(o.input);
    if (o.train_count) m.train_per_class = *o.train_count;
    if (o.eval_count) m.eval_per_class = *o.eval_count;
    if (o.size) m.preprocess.size = *o.size;
    return m;
}

std::vector<DatasetEntry> pick_split(const DatasetSplit& s, const std::string& which) {
    if (which == "train") return s.train;
    if (which == "eval") return s.eval;
    std::vector<DatasetEntry> all = s.train;
    all.insert(all.end(), s.eval.begin(), s.eval.end());
    return all;
}

// Runs fn(i) for i < n on a pool of `jobs` threads.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1)); ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

Image load_preprocessed(const fs::path& path, const Options& o) {
    Preprocess p;
    if (o.size) p.size = *o.size;
    return preprocess(load_image(path), p);
}

int cmd_extract(const Options& o) {
    o.params.validate();
    const DatasetManifest manifest = dataset_from(o);
    validate_pyramid_input(manifest.preprocess.size, o.params.pyramid());
    const auto entries = pick_split(split_dataset(manifest), o.split);
    if (entries.empty()) throw DataError("the " + o.split + " split is empty");
    log(Level::info, "extracting ", entries.size(), " images at ", manifest.preprocess.size, "x",
        manifest.preprocess.size, " (D=", pss_dim(o.params), ")");

    std::vector<std::optional<ArchiveRecord>> records(entries.size());
    std::vector<std::string> failures(entries.size());
    std::atomic<std::size_t> done{0};
    parallel_for(entries.size(), o.jobs, [&](std::size_t i) {
        try {
            const Image img = preprocess(load_image(entries[i].path), manifest.preprocess);
            records[i] = ArchiveRecord{entries[i].id, entries[i].label, extract_pss(img, o.params).values};
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
        const auto k = ++done;
        if (k % 50 == 0) log(Level::debug, k, "/", entries.size(), " images");
    });

    FeatureArchive archive{o.params, {}};
    std::size_t failed = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (records[i]) {
            archive.records.push_back(std::move(*records[i]));
        } else {
            ++failed;
            log(Level::error, entries[i].path.string(), ": ", failures[i]);
        }
    }
    save_archive(archive, fs::path(o.output));
    log(Level::info, "extracted ", archive.records.size(), " of ", entries.size(), " images into ", o.output,
        failed ? " (" + std::to_string(failed) + " failed)" : std::string());
    return failed ? kData : kOk;
}

void print_model_summary(const HppcaModel& m, std::ostream& out) {
    const auto dims = m.group_dims();
    out << "input_dim " << m.input_dim() << '\n';
    out << "group_dims";
    for (std::size_t g = 0; g < dims.size(); ++g) out << (g ? "," : " ") << dims[g];
    out << '\n';
    out << "intermediate_dim " << m.intermediate_dim() << '\n';
    out << "output_dim " << m.output_dim() << '\n';
    out << "reduction_rate " << std::fixed << std::setprecision(2) << 100.0 * m.reduction_rate() << "%\n";
    out << std::defaultfloat;
}

int cmd_train(const Options& o) {
    const FeatureArchive archive = load_archive(fs::path(o.input));
    if (archive.records.empty()) throw DataError("archive " + o.input + " has no records");
    log(Level::info, "fitting ", archive.records.size(), " vectors, r=", csv_number(o.ccr), ", d=", o.dim);
    const auto vectors = archive.vectors();
    const GroupStage stage = fit_groups(vectors, o.ccr, o.jobs);
    const auto inter = static_cast<std::size_t>(stage.latents.cols());
    if (o.dim > inter) {
        throw UsageError("--dim " + std::to_string(o.dim) + " exceeds the intermediate dimension " +
                         std::to_string(inter) + " reached at --ccr " + csv_number(o.ccr));
    }
    const HppcaModel model = fit_final(stage, o.dim);
    save_model(model, fs::path(o.output));
    const fs::path spectrum = o.spectrum.empty() ? fs::path(o.output + ".spectrum.csv") : fs::path(o.spectrum);
    std::ostringstream csv;
    write_spectra_csv(model, csv);
    write_text(spectrum, csv.str());
    print_model_summary(model, std::cout);
    log(Level::info, "wrote ", o.output, " and ", spectrum.string());
    return kOk;
}

// A statistic vector from an image (preprocessed) or a PSSV file.
PssVector vector_from(const fs::path& path, const Options& o, std::size_t* side) {
    if (file_magic(path) == "PSSV") {
        if (side) *side = 0;
        return load_pss(path);
    }
    const PssParams params = o.params;
    const Image img = load_preprocessed(path, o);
    if (side) *side = img.width();
    return extract_pss(img, params);
}

int cmd_encode(Options o) {
    const HppcaModel model = load_model(fs::path(o.model));
    o.params = model.params();
    std::size_t side = 0;
    const PssVector v = vector_from(o.input, o, &side);
    const Eigen::VectorXd z = model.encode(v);
    TextureCode code{model.params(), side, std::vector<double>(z.data(), z.data() + z.size())};
    if (!o.output.empty()) save_code(code, fs::path(o.output));
    if (o.output.empty() || !o.csv.empty()) {
        std::ostringstream s;
        s << "index,value\n";
        for (std::size_t i = 0; i < code.values.size(); ++i) s << i << ',' << csv_number(code.values[i]) << '\n';
        if (o.csv.empty()) std::cout << s.str();
        else write_text(o.csv, s.str());
    }
    return kOk;
}

int cmd_decode(const Options& o) {
    const HppcaModel model = load_model(fs::path(o.model));
    const TextureCode code = load_code(fs::path(o.input));
    if (!(code.params == model.params())) throw DataError("code was produced with different statistic parameters");
    const PssVector v = model.decode(Eigen::Map<const Eigen::VectorXd>(code.values.data(), static_cast<Eigen::Index>(code.values.size())));
    if (!o.output.empty()) save_pss(v, fs::path(o.output));
    if (o.output.empty() || !o.csv.empty()) {
        std::ostringstream s;
        write_pss_csv(v, s);
        if (o.csv.empty()) std::cout << s.str();
        else write_text(o.csv, s.str());
    }
    return kOk;
}

SynthesisConfig synthesis_config(const Options& o) {
    SynthesisConfig cfg;
    cfg.iterations = o.iterations;
    cfg.seed = o.seed;
    return cfg;
}

int cmd_synth(Options o) {
    if (o.image.empty() == o.code.empty()) throw UsageError("synth needs exactly one of --image or --code");
    const HppcaModel model = load_model(fs::path(o.model));
    o.params = model.params();
    SynthesisConfig cfg = synthesis_config(o);
    Eigen::VectorXd z;
    if (!o.image.empty()) {
        std::size_t side = 0;
        const PssVector v = vector_from(o.image, o, &side);
        cfg.size = side ? side : o.size.value_or(128);
        z = model.encode(v);
    } else {
        const TextureCode code = load_code(fs::path(o.code));
        if (!(code.params == model.params())) throw DataError("code was produced with different statistic parameters");
        z = Eigen::Map<const Eigen::VectorXd>(code.values.data(), static_cast<Eigen::Index>(code.values.size()));
        cfg.size = o.size.value_or(code.side ? code.side : 128);
    }
    const PssVector target = model.decode(z);
    log(Level::info, "synthesizing ", cfg.size, "x", cfg.size, ", ", cfg.iterations, " iterations, seed ", cfg.seed);
    const SynthesisResult r = synthesize(target, cfg);
    save_pgm(r.image, fs::path(o.output));
    std::ostringstream trace;
    trace << "iteration,distance\n";
    for (std::size_t i = 0; i < r.trace.size(); ++i) trace << i << ',' << csv_number(r.trace[i]) << '\n';
    const fs::path trace_path = o.trace.empty() ? fs::path(o.output + ".trace.csv") : fs::path(o.trace);
    write_text(trace_path, trace.str());
    log(Level::info, "distance ", csv_number(r.trace.front()), " -> ", csv_number(r.trace.back()));
    return kOk;
}

int cmd_eval(Options o) {
    const int modes = !o.model.empty() + !o.dims.empty() + !o.ccrs.empty();
    if (modes != 1) throw UsageError("eval needs exactly one of --model, --dims or --ccrs");
    if (!o.dims.empty() || !o.ccrs.empty()) {
        if (o.archive.empty()) throw UsageError("--dims and --ccrs sweeps need --archive");
    }
    DatasetManifest manifest = dataset_from(o);
    const auto entries = pick_split(split_dataset(manifest), o.split);
    if (entries.empty()) throw DataError("the " + o.split + " split is empty");

    std::vector<Image> images(entries.size());
    std::vector<std::string> classes;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        images[i] = preprocess(load_image(entries[i].path), manifest.preprocess);
        if (std::find(classes.begin(), classes.end(), entries[i].label) == classes.end()) classes.push_back(entries[i].label);
    }

    struct Sweep {
        std::string kind;
        double value;
        std::optional<HppcaModel> model;
    };
    std::vector<Sweep> sweeps;
    if (!o.model.empty()) {
        auto m = load_model(fs::path(o.model));
        sweeps.push_back({"model", static_cast<double>(m.output_dim()), std::move(m)});
    } else {
        const FeatureArchive archive = load_archive(fs::path(o.archive));
        const auto vectors = archive.vectors();
        if (!o.dims.empty()) {
            const GroupStage stage = fit_groups(vectors, o.ccr, o.jobs);
            for (std::size_t d : o.dims) sweeps.push_back({"dim", static_cast<double>(d), fit_final(stage, d)});
        } else {
            for (double r : o.ccrs) {
                const GroupStage stage = fit_groups(vectors, r, o.jobs);
                const std::size_t d = std::min<std::size_t>({o.dim, static_cast<std::size_t>(stage.latents.cols()),
                                                             static_cast<std::size_t>(stage.latents.rows()) - 1});
                if (d < o.dim) log(Level::warn, "r=", csv_number(r), ": d reduced to ", d, " (intermediate ", stage.latents.cols(), ")");
                sweeps.push_back({"ccr", r, fit_final(stage, d)});
            }
        }
    }

    std::ostringstream report, detail;
    report << "sweep,value,intermediate_dim,output_dim,pss_error";
    for (const auto& c : classes) report << ",tss_" << c;
    report << ",tss_mean\n";
    detail << "sweep,value,id,label,pss_error,tss,final_distance\n";
    const SynthesisConfig cfg = synthesis_config(o);
    for (const auto& s : sweeps) {
        log(Level::info, "evaluating ", s.kind, "=", csv_number(s.value), " on ", images.size(), " images");
        const auto rows = evaluate_model(*s.model, images, cfg, o.patch, o.jobs);
        std::map<std::string, std::pair<double, std::size_t>> per_class;
        double tss_sum = 0.0, err_sum = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto& pc = per_class[entries[i].label];
            pc.first += rows[i].tss;
            pc.second += 1;
            tss_sum += rows[i].tss;
            err_sum += rows[i].pss_error;
            detail << s.kind << ',' << csv_number(s.value) << ',' << entries[i].id << ',' << entries[i].label << ','
                   << csv_number(rows[i].pss_error) << ',' << csv_number(rows[i].tss) << ','
                   << csv_number(rows[i].trace.back()) << '\n';
        }
        const double n = static_cast<double>(rows.size());
        report << s.kind << ',' << csv_number(s.value) << ',' << s.model->intermediate_dim() << ','
               << s.model->output_dim() << ',' << csv_number(err_sum / n);
        for (const auto& c : classes) report << ',' << csv_number(per_class[c].first / static_cast<double>(per_class[c].second));
        report << ',' << csv_number(tss_sum / n) << '\n';
    }
    if (o.output.empty()) std::cout << report.str();
    else write_text(o.output, report.str());
    if (!o.per_image.empty()) write_text(o.per_image, detail.str());
    return kOk;
}

int cmd_info(const Options& o) {
    const fs::path path = o.input;
    const std::string magic = file_magic(path);
    auto params = [](const PssParams& p) {
        return "scales " + std::to_string(p.scales) + ", orientations " + std::to_string(p.orientations) +
               ", neighborhood " + std::to_string(p.neighborhood);
    };
    if (magic == "PSSA") {
        const auto a = load_archive(path);
        std::map<std::string, std::size_t> counts;
        for (const auto& r : a.records) ++counts[r.label];
        std::cout << "feature archive (version " << kArchiveFormatVersion << ")\n" << params(a.params) << '\n'
                  << "dimension " << pss_dim(a.params) << "\nrecords " << a.records.size() << '\n';
        for (const auto& [label, n] : counts) std::cout << "class " << label << ' ' << n << '\n';
    } else if (magic == "HPCA") {
        const auto m = load_model(path);
        std::cout << "hierarchical PPCA model (version " << kModelFormatVersion << ")\n" << params(m.params()) << '\n'
                  << "threshold " << csv_number(m.threshold()) << '\n';
        print_model_summary(m, std::cout);
    } else if (magic == "PSSV") {
        const auto v = load_pss(path);
        std::cout << "statistic vector (version " << kVectorFormatVersion << ")\n" << params(v.params) << '\n'
                  << "dimension " << v.dim() << '\n';
    } else if (magic == "TXCD") {
        const auto c = load_code(path);
        std::cout << "texture code (version " << kCodeFormatVersion << ")\n" << params(c.params) << '\n'
                  << "image side " << c.side << "\nlength " << c.values.size() << '\n';
    } else if (magic.rfind("P2", 0) == 0 || magic.rfind("P5", 0) == 0) {
        const auto img = load_image(path);
        std::cout << "image " << img.width() << "x" << img.height() << "\nmean " << csv_number(mean(img.pixels()))
                  << "\nstd " << csv_number(std::sqrt(variance(img.pixels()))) << '\n';
    } else {
        throw DataError("unrecognized file: " + path.string());
    }
    return kOk;
}

void add_pss_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--scales", o.params.scales, "Pyramid scales N")->capture_default_str();
    cmd->add_option("--orients", o.params.orientations, "Orientations K")->capture_default_str();
    cmd->add_option("--neighbor", o.params.neighborhood, "Autocorrelation window M (odd)")->capture_default_str();
}

void add_size_flag(CLI::App* cmd, Options& o, const char* what) {
    cmd->add_option_function<std::size_t>("--size", [&o](std::size_t v) { o.size = v; }, what);
}

void add_synth_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--iterations", o.iterations, "Descent iterations")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Noise seed")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Texture statistics, hierarchical PPCA texture codes and synthesis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "texlat 1.0");
    Options o;
    int (*handler)(const Options&) = nullptr;

    auto* extract = app.add_subcommand("extract", "Compute statistic vectors for a dataset into a feature archive");
    extract->add_option("dataset", o.input, "Dataset directory or JSON manifest")->required();
    extract->add_option("-o,--output", o.output, "Archive path")->required();
    add_pss_flags(extract, o);
    add_size_flag(extract, o, "Preprocessed image side (default 128)");
    extract->add_option("--split", o.split, "train, eval or all")->check(CLI::IsMember({"train", "eval", "all"}))->capture_default_str();
    extract->add_option_function<std::size_t>("--train", [&o](std::size_t v) { o.train_count = v; }, "Training images per class (0 = all)");
    extract->add_option_function<std::size_t>("--eval", [&o](std::size_t v) { o.eval_count = v; }, "Evaluation images per class");
    extract->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
    extract->callback([&] { handler = [](const Options& x) { return cmd_extract(x); }; });

    auto* train = app.add_subcommand("train", "Fit the hierarchical PPCA model");
    train->add_option("archive", o.input, "Feature archive")->required();
    train->add_option("-o,--output", o.output, "Model path")->required();
    train->add_option("--ccr", o.ccr, "Group cumulative contribution threshold r")->capture_default_str();
    train->add_option("--dim", o.dim, "Output dimension d")->capture_default_str();
    train->add_option("--spectrum", o.spectrum, "Eigenspectrum CSV (default <model>.spectrum.csv)");
    train->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
    train->callback([&] { handler = [](const Options& x) { return cmd_train(x); }; });

    auto* encode = app.add_subcommand("encode", "Encode an image or statistic vector into a texture code");
    encode->add_option("model", o.model, "Model file")->required();
    encode->add_option("input", o.input, "PGM image or statistic vector file")->required();
    encode->add_option("-o,--output", o.output, "Code file (prints CSV when omitted)");
    encode->add_option("--csv", o.csv, "Also write the code as CSV");
    add_size_flag(encode, o, "Preprocessed image side (default 128)");
    encode->callback([&] { handler = [](const Options& x) { return cmd_encode(x); }; });

    auto* decode = app.add_subcommand("decode", "Decode a texture code into a statistic vector");
    decode->add_option("model", o.model, "Model file")->required();
    decode->add_option("code", o.input, "Code file")->required();
    decode->add_option("-o,--output", o.output, "Statistic vector file (prints CSV when omitted)");
    decode->add_option("--csv", o.csv, "Also write the vector as CSV");
    decode->callback([&] { handler = [](const Options& x) { return cmd_decode(x); }; });

    auto* synth = app.add_subcommand("synth", "Synthesize a texture from an image or code through the model");
    synth->add_option("model", o.model, "Model file")->required();
    synth->add_option("--image", o.image, "Source PGM image or statistic vector file");
    synth->add_option("--code", o.code, "Code file");
    synth->add_option("-o,--output", o.output, "Output PGM")->required();
    synth->add_option("--trace", o.trace, "Distance trace CSV (default <output>.trace.csv)");
    add_synth_flags(synth, o);
    add_size_flag(synth, o, "Image side (default 128 or the code's side)");
    synth->callback([&] { handler = [](const Options& x) { return cmd_synth(x); }; });

    auto* eval = app.add_subcommand("eval", "Score synthesized textures with TSS over a model or a sweep");
    eval->add_option("dataset", o.input, "Dataset directory or JSON manifest")->required();
    eval->add_option("--model", o.model, "Evaluate one model file");
    eval->add_option("--archive", o.archive, "Training archive for --dims / --ccrs sweeps");
    eval->add_option("--dims", o.dims, "Sweep output dimensions d (uses --ccr)")->delimiter(',');
    eval->add_option("--ccrs", o.ccrs, "Sweep thresholds r (uses --dim)")->delimiter(',');
    eval->add_option("--ccr", o.ccr, "Threshold for --dims sweeps")->capture_default_str();
    eval->add_option("--dim", o.dim, "Output dimension for --ccrs sweeps")->capture_default_str();
    eval->add_option("-o,--output", o.output, "Report CSV (stdout when omitted)");
    eval->add_option("--per-image", o.per_image, "Per-image CSV");
    eval->add_option("--split", o.split, "train, eval or all")->check(CLI::IsMember({"train", "eval", "all"}));
    eval->add_option_function<std::size_t>("--train", [&o](std::size_t v) { o.train_count = v; }, "Training images per class (0 = all)");
    eval->add_option_function<std::size_t>("--eval", [&o](std::size_t v) { o.eval_count = v; }, "Evaluation images per class");
    eval->add_option("--patch-size", o.patch, "TSS patch side")->capture_default_str();
    eval->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
    add_synth_flags(eval, o);
    add_size_flag(eval, o, "Preprocessed image side (default 128)");
    eval->callback([&] {
        if (eval->count("--split") == 0) o.split = "eval";
        handler = [](const Options& x) { return cmd_eval(x); };
    });

    auto* info = app.add_subcommand("info", "Describe an archive, model, vector, code or image file");
    info->add_option("file", o.input, "File to describe")->required();
    info->callback([&] { handler = [](const Options& x) { return cmd_info(x); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (o.jobs == 0) throw UsageError("--jobs must be at least 1");
        log(Level::debug, "kernels: ", simd::kernels().name);
        return handler(o);
    } catch (const UsageError& e) {
        log(Level::error, e.what());
        return kUsage;
    } catch (const NumericError& e) {
        log(Level::error, e.what());
        return kNumeric;
    } catch (const DataError& e) {
        log(Level::error, e.what());
        return kData;
    } catch (const fs::filesystem_error& e) {
        log(Level::error, e.what());
        return kData;
    } catch (const std::exception& e) {
        log(Level::error, e.what());
        return kData;
    }
}

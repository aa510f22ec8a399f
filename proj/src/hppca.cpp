#include "texlat/hppca.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <optional>
#include <thread>

#include "binary_io.hpp"
#include "texlat/error.hpp"
#include "texlat/formats.hpp"

namespace texlat {
namespace {

PpcaModel fit_group(const Eigen::MatrixXd& slice, double threshold) {
    const auto basis = analyze(slice);
    const auto d = static_cast<std::size_t>(slice.cols());
    if (basis.eigenvalues[0] <= kGroupVarianceFloor) {
        // Constant group: one latent that is always zero.
        return PpcaModel(basis.mean, Eigen::MatrixXd::Zero(slice.cols(), 1), 0.0, Eigen::VectorXd::Zero(slice.cols()));
    }
    const std::vector<double> lam(basis.eigenvalues.data(), basis.eigenvalues.data() + d);
    const std::size_t q = std::min({choose_dim(lam, threshold), basis.samples - 1, d});
    return fit_ppca(basis, q);
}

void write_block(detail::BinaryWriter& w, const PpcaModel& m) {
    w.put<std::uint64_t>(m.input_dim());
    w.put<std::uint64_t>(m.latent_dim());
    w.put<double>(m.noise_variance());
    w.doubles(m.mean().data(), m.input_dim());
    w.doubles(m.loadings().data(), m.input_dim() * m.latent_dim());
    w.doubles(m.eigenvalues().data(), m.input_dim());
}

PpcaModel read_block(detail::BinaryReader& r) {
    const auto d = r.get<std::uint64_t>();
    const auto q = r.get<std::uint64_t>();
    const auto sigma2 = r.get<double>();
    if (d == 0 || q == 0 || q > d) throw DataError("corrupt container: invalid PPCA block dimensions");
    r.require((2 * d + d * q) * sizeof(double));
    Eigen::VectorXd mu(static_cast<Eigen::Index>(d)), lam(static_cast<Eigen::Index>(d));
    Eigen::MatrixXd w(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(q));
    r.doubles(mu.data(), d);
    r.doubles(w.data(), d * q);
    r.doubles(lam.data(), d);
    return PpcaModel(std::move(mu), std::move(w), sigma2, std::move(lam));
}

} // namespace

HppcaModel::HppcaModel(PssParams params, double threshold, std::vector<PpcaModel> groups, PpcaModel final_model)
    : params_(params),
      threshold_(threshold),
      groups_(std::move(groups)),
      final_(std::move(final_model)),
      layout_((params.validate(), params)) {
    if (groups_.size() != kPssGroups) throw DataError("HPPCA model needs exactly 10 group models");
    std::size_t inter = 0;
    for (std::size_t g = 0; g < kPssGroups; ++g) {
        if (groups_[g].input_dim() != layout_.group(g + 1).size) {
            throw DataError("HPPCA group C" + std::to_string(g + 1) + " model has input dimension " +
                            std::to_string(groups_[g].input_dim()) + ", layout expects " +
                            std::to_string(layout_.group(g + 1).size));
        }
        inter += groups_[g].latent_dim();
    }
    if (final_.input_dim() != inter) throw DataError("HPPCA final model input does not match the intermediate dimension");
}

std::vector<std::size_t> HppcaModel::group_dims() const {
    std::vector<std::size_t> dims;
    for (const auto& g : groups_) dims.push_back(g.latent_dim());
    return dims;
}

Eigen::VectorXd HppcaModel::intermediate(const PssVector& v) const {
    if (!(v.params == params_) || v.dim() != layout_.dim()) {
        throw UsageError("statistic vector layout does not match the model (dimension " + std::to_string(v.dim()) +
                         ", model expects " + std::to_string(layout_.dim()) + ")");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(intermediate_dim()));
    Eigen::Index at = 0;
    for (std::size_t g = 0; g < kPssGroups; ++g) {
        const auto range = layout_.group(g + 1);
        const Eigen::Map<const Eigen::VectorXd> slice(v.values.data() + range.offset, static_cast<Eigen::Index>(range.size));
        const Eigen::VectorXd z = groups_[g].encode(slice);
        out.segment(at, z.size()) = z;
        at += z.size();
    }
    return out;
}

Eigen::VectorXd HppcaModel::encode(const PssVector& v) const { return final_.encode(intermediate(v)); }

PssVector HppcaModel::decode_intermediate(const Eigen::VectorXd& latents) const {
    if (static_cast<std::size_t>(latents.size()) != intermediate_dim()) {
        throw UsageError("intermediate vector has length " + std::to_string(latents.size()) + ", model expects " +
                         std::to_string(intermediate_dim()));
    }
    PssVector out{params_, std::vector<double>(layout_.dim())};
    Eigen::Index at = 0;
    for (std::size_t g = 0; g < kPssGroups; ++g) {
        const auto q = static_cast<Eigen::Index>(groups_[g].latent_dim());
        const Eigen::VectorXd x = groups_[g].decode(latents.segment(at, q));
        std::copy(x.data(), x.data() + x.size(), out.values.begin() + static_cast<std::ptrdiff_t>(layout_.group(g + 1).offset));
        at += q;
    }
    return out;
}

PssVector HppcaModel::decode(const Eigen::VectorXd& code) const {
    if (static_cast<std::size_t>(code.size()) != output_dim()) {
        throw UsageError("code has length " + std::to_string(code.size()) + ", model expects " +
                         std::to_string(output_dim()));
    }
    return decode_intermediate(final_.decode(code));
}

double HppcaModel::reduction_rate() const { return texlat::reduction_rate(input_dim(), output_dim()); }

double reduction_rate(std::size_t input_dim, std::size_t output_dim) {
    if (input_dim == 0) throw UsageError("input dimension must be positive");
    return 1.0 - static_cast<double>(output_dim) / static_cast<double>(input_dim);
}

Eigen::MatrixXd stack_vectors(std::span<const PssVector> data) {
    if (data.empty()) throw UsageError("no statistic vectors given");
    const auto& params = data.front().params;
    const std::size_t dim = pss_dim(params);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!(data[i].params == params) || data[i].dim() != dim)
            throw DataError("statistic vector " + std::to_string(i) + " does not share the layout of the first vector");
        x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(data[i].values.data(), static_cast<Eigen::Index>(dim));
    }
    return x;
}

GroupStage fit_groups(std::span<const PssVector> data, double threshold, std::size_t jobs) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw UsageError("contribution threshold must lie in (0, 1]");
    const Eigen::MatrixXd x = stack_vectors(data);
    if (x.rows() < 2) throw UsageError("HPPCA needs at least 2 statistic vectors, got " + std::to_string(x.rows()));
    const PssParams params = data.front().params;
    const PssLayout layout(params);

    std::vector<std::optional<PpcaModel>> fitted(kPssGroups);
    std::vector<std::exception_ptr> failures(kPssGroups);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t g; (g = next.fetch_add(1)) < kPssGroups;) {
            try {
                const auto r = layout.group(g + 1);
                fitted[g].emplace(fit_group(x.middleCols(static_cast<Eigen::Index>(r.offset), static_cast<Eigen::Index>(r.size)), threshold));
            } catch (...) {
                failures[g] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, kPssGroups);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    GroupStage stage;
    stage.params = params;
    stage.threshold = threshold;
    std::size_t inter = 0;
    for (auto& m : fitted) {
        inter += m->latent_dim();
        stage.groups.push_back(std::move(*m));
    }
    stage.latents.resize(x.rows(), static_cast<Eigen::Index>(inter));
    Eigen::Index at = 0;
    for (std::size_t g = 0; g < kPssGroups; ++g) {
        const auto r = layout.group(g + 1);
        const auto q = static_cast<Eigen::Index>(stage.groups[g].latent_dim());
        stage.latents.middleCols(at, q) =
            stage.groups[g].encode_rows(x.middleCols(static_cast<Eigen::Index>(r.offset), static_cast<Eigen::Index>(r.size)));
        at += q;
    }
    return stage;
}

HppcaModel fit_final(const GroupStage& stage, std::size_t output_dim) {
    const auto inter = static_cast<std::size_t>(stage.latents.cols());
    const auto n = static_cast<std::size_t>(stage.latents.rows());
    if (output_dim < 1) throw UsageError("output dimension must be at least 1");
    if (output_dim > inter) {
        throw UsageError("output dimension " + std::to_string(output_dim) + " exceeds the intermediate dimension " +
                         std::to_string(inter));
    }
    if (output_dim > n - 1) {
        throw UsageError("output dimension " + std::to_string(output_dim) + " needs more than " + std::to_string(n) +
                         " training vectors");
    }
    return HppcaModel(stage.params, stage.threshold, stage.groups, fit_ppca(stage.latents, output_dim));
}

HppcaModel fit_hierarchy(std::span<const PssVector> data, double threshold, std::size_t output_dim, std::size_t jobs) {
    if (output_dim < 1) throw UsageError("output dimension must be at least 1");
    return fit_final(fit_groups(data, threshold, jobs), output_dim);
}

void save_model(const HppcaModel& model, std::ostream& out) {
    detail::BinaryWriter w(out);
    w.magic("HPCA");
    w.put<std::uint32_t>(kModelFormatVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.params().scales));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.params().orientations));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.params().neighborhood));
    w.put<double>(model.threshold());
    for (const auto& g : model.group_models()) write_block(w, g);
    write_block(w, model.final_model());
    w.check("model");
}

void save_model(const HppcaModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    save_model(model, out);
    out.flush();
    if (!out) throw DataError("failed writing " + path.string());
}

HppcaModel load_model(std::istream& in) {
    detail::BinaryReader r(in, "model file");
    r.expect_magic("HPCA");
    r.expect_version(kModelFormatVersion);
    PssParams params;
    params.scales = r.get<std::uint32_t>();
    params.orientations = r.get<std::uint32_t>();
    params.neighborhood = r.get<std::uint32_t>();
    const double threshold = r.get<double>();
    try {
        params.validate();
    } catch (const UsageError& e) {
        throw DataError(std::string("corrupt container: ") + e.what());
    }
    std::vector<PpcaModel> groups;
    for (std::size_t g = 0; g < kPssGroups; ++g) groups.push_back(read_block(r));
    PpcaModel final_model = read_block(r);
    r.expect_end();
    return HppcaModel(params, threshold, std::move(groups), std::move(final_model));
}

HppcaModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return load_model(in);
}

void write_spectra_csv(const HppcaModel& model, std::ostream& out) {
    std::ostringstream buf;
    buf.imbue(std::locale::classic());
    buf << "stage,index,eigenvalue,ccr\n";
    auto emit = [&](const std::string& stage, const Eigen::VectorXd& lam) {
        const std::vector<double> v(lam.data(), lam.data() + lam.size());
        std::vector<double> ccr(v.size(), 0.0);
        if (lam.sum() > 0) ccr = cumulative_contribution(v);
        for (std::size_t i = 0; i < v.size(); ++i) buf << stage << ',' << i + 1 << ',' << format_double(v[i]) << ',' << format_double(ccr[i]) << '\n';
    };
    for (std::size_t g = 0; g < kPssGroups; ++g) emit("C" + std::to_string(g + 1), model.group_models()[g].eigenvalues());
    emit("final", model.final_model().eigenvalues());
    out << buf.str();
}

} // namespace texlat

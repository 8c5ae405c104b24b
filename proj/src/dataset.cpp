#include "squeezefit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "squeezefit/errors.hpp"
#include "squeezefit/random.hpp"

namespace sqz {

LabeledDataset::LabeledDataset(MatrixXd points, std::vector<int> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
    if (static_cast<Index>(labels_.size()) != points_.rows())
        throw InvalidInput("LabeledDataset: " + std::to_string(labels_.size()) + " labels for " +
                           std::to_string(points_.rows()) + " points");
    if (!points_.allFinite()) throw InvalidInput("LabeledDataset: non-finite coordinate");
}

std::vector<int> LabeledDataset::classes() const {
    std::vector<int> out(labels_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Index> LabeledDataset::indices_of(int label) const {
    std::vector<Index> out;
    for (Index i = 0; i < size(); ++i)
        if (labels_[static_cast<std::size_t>(i)] == label) out.push_back(i);
    return out;
}

LabeledDataset LabeledDataset::transformed(const MatrixXd& t) const {
    if (t.cols() != dim()) throw InvalidInput("transformed: operator has wrong input dimension");
    return LabeledDataset(points_ * t.transpose(), labels_);
}

LabeledDataset LabeledDataset::subset(const std::vector<Index>& rows) const {
    MatrixXd pts(static_cast<Index>(rows.size()), dim());
    std::vector<int> lab;
    lab.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        pts.row(static_cast<Index>(r)) = points_.row(rows[r]);
        lab.push_back(label(rows[r]));
    }
    return LabeledDataset(std::move(pts), std::move(lab));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
    field = trim(field);
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

} // namespace

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t arity = 0;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && options.skip_header) continue;
        if (trim(line).empty()) continue;
        const auto fields = split_commas(line);
        if (arity == 0) {
            arity = fields.size();
            if (arity < 2) throw FormatError("row needs a label and at least one feature", line_no);
            if (options.label_column < 0 || static_cast<std::size_t>(options.label_column) >= arity)
                throw FormatError("label column out of range", line_no);
        } else if (fields.size() != arity) {
            throw FormatError("expected " + std::to_string(arity) + " fields, found " +
                                  std::to_string(fields.size()),
                              line_no);
        }
        std::vector<double> row;
        row.reserve(arity - 1);
        int label = 0;
        for (std::size_t c = 0; c < arity; ++c) {
            if (static_cast<Index>(c) == options.label_column) {
                if (!parse_number(fields[c], label)) throw FormatError("label is not an integer", line_no);
            } else {
                double v = 0;
                if (!parse_number(fields[c], v) || !std::isfinite(v))
                    throw FormatError("feature is not a finite number", line_no);
                row.push_back(v);
            }
        }
        rows.push_back(std::move(row));
        labels.push_back(label);
    }
    if (rows.empty()) throw FormatError("no data rows in " + path.string());

    MatrixXd points(static_cast<Index>(rows.size()), static_cast<Index>(arity - 1));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            points(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return LabeledDataset(std::move(points), std::move(labels));
}

void save_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << std::setprecision(17);
    for (Index i = 0; i < ds.size(); ++i) {
        out << ds.label(i);
        for (Index j = 0; j < ds.dim(); ++j) out << ',' << ds.points()(i, j);
        out << '\n';
    }
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError(what + ": truncated header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

std::vector<unsigned char> read_bytes(std::istream& in, std::size_t count, const std::string& what) {
    std::vector<unsigned char> buf(count);
    if (count > 0 && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count)))
        throw FormatError(what + ": truncated payload");
    return buf;
}

} // namespace

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        const std::set<int>& keep_labels) {
    std::ifstream img(images, std::ios::binary);
    if (!img) throw FormatError("cannot open " + images.string());
    std::ifstream lab(labels, std::ios::binary);
    if (!lab) throw FormatError("cannot open " + labels.string());

    if (read_be32(img, images.string()) != 0x00000803u) throw FormatError(images.string() + ": bad image magic");
    const std::uint32_t n_img = read_be32(img, images.string());
    const std::uint32_t rows = read_be32(img, images.string());
    const std::uint32_t cols = read_be32(img, images.string());
    if (read_be32(lab, labels.string()) != 0x00000801u) throw FormatError(labels.string() + ": bad label magic");
    const std::uint32_t n_lab = read_be32(lab, labels.string());
    if (n_img != n_lab)
        throw FormatError("image count " + std::to_string(n_img) + " does not match label count " +
                          std::to_string(n_lab));

    const std::size_t pixels = std::size_t(rows) * cols;
    const auto label_bytes = read_bytes(lab, n_lab, labels.string());
    const auto pixel_bytes = read_bytes(img, pixels * n_img, images.string());

    std::vector<Index> kept;
    for (std::uint32_t i = 0; i < n_lab; ++i)
        if (keep_labels.empty() || keep_labels.count(label_bytes[i])) kept.push_back(i);

    MatrixXd points(static_cast<Index>(kept.size()), static_cast<Index>(pixels));
    std::vector<int> out_labels;
    out_labels.reserve(kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
        const auto* src = pixel_bytes.data() + std::size_t(kept[r]) * pixels;
        for (std::size_t p = 0; p < pixels; ++p) points(static_cast<Index>(r), static_cast<Index>(p)) = src[p] / 255.0;
        out_labels.push_back(label_bytes[static_cast<std::size_t>(kept[r])]);
    }
    return LabeledDataset(std::move(points), std::move(out_labels));
}

MatrixXd area_weights(Index in, Index out) {
    if (in < 1 || out < 1 || out > in) throw InvalidInput("area_weights: need 1 <= out <= in");
    MatrixXd w = MatrixXd::Zero(out, in);
    const double width = double(in) / double(out);
    for (Index j = 0; j < out; ++j) {
        const double lo = j * width;
        const double hi = (j + 1) * width;
        for (Index i = static_cast<Index>(std::floor(lo)); i < in && i < hi; ++i) {
            const double overlap = std::min(hi, double(i + 1)) - std::max(lo, double(i));
            if (overlap > 0) w(j, i) = overlap / width;
        }
    }
    return w;
}

LabeledDataset downsample_images(const LabeledDataset& ds, Index side_in, Index side_out) {
    if (ds.dim() != side_in * side_in)
        throw InvalidInput("downsample_images: dimension " + std::to_string(ds.dim()) + " is not " +
                           std::to_string(side_in) + "^2");
    if (side_out < 1 || side_out > side_in) throw InvalidInput("downsample_images: bad output side");
    const MatrixXd w = area_weights(side_in, side_out);
    MatrixXd out(ds.size(), side_out * side_out);
    for (Index i = 0; i < ds.size(); ++i) {
        // Row-major image: entry (r, c) lives at r * side + c.
        const VectorXd flat = ds.points().row(i).transpose();
        const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> img(
            flat.data(), side_in, side_in);
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> small = w * img * w.transpose();
        out.row(i) = Eigen::Map<const VectorXd>(small.data(), side_out * side_out).transpose();
    }
    return LabeledDataset(std::move(out), ds.labels());
}

LabeledDataset downsample_signals(const LabeledDataset& ds, Index dim_out) {
    if (dim_out < 1 || dim_out > ds.dim()) throw InvalidInput("downsample_signals: bad output dimension");
    const MatrixXd w = area_weights(ds.dim(), dim_out);
    return LabeledDataset(ds.points() * w.transpose(), ds.labels());
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, double fraction,
                                                           std::uint64_t seed) {
    if (!(fraction > 0 && fraction < 1)) throw InvalidInput("split_train_test: fraction must lie in (0,1)");
    Rng rng(seed);
    std::vector<Index> train, test;
    for (int label : ds.classes()) {
        auto idx = ds.indices_of(label);
        if (idx.size() < 2)
            throw StratifyError("class " + std::to_string(label) + " has fewer than 2 points");
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_train = static_cast<std::size_t>(std::llround(fraction * double(idx.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {ds.subset(train), ds.subset(test)};
}

LabeledDataset random_subsample(const LabeledDataset& ds, Index count, std::uint64_t seed) {
    std::vector<Index> idx(static_cast<std::size_t>(ds.size()));
    std::iota(idx.begin(), idx.end(), Index(0));
    if (count >= ds.size()) return ds;
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(count));
    std::sort(idx.begin(), idx.end());
    return ds.subset(idx);
}

} // namespace sqz

#include "hwforest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <zlib.h>

#include "hwforest/rng.hpp"

namespace hwforest {

namespace {

class GzReader {
public:
    explicit GzReader(const std::string& path) : path_(path), file_(gzopen(path.c_str(), "rb")) {
        if (!file_) fail(Errc::Io, "cannot open " + path);
    }
    ~GzReader() {
        if (file_) gzclose(file_);
    }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    void read_exact(void* dst, std::size_t len) {
        int got = gzread(file_, dst, static_cast<unsigned>(len));
        if (got < 0 || static_cast<std::size_t>(got) != len)
            fail(Errc::TruncatedFile, path_ + " ended early");
    }

    std::uint32_t read_be32() {
        unsigned char b[4];
        read_exact(b, 4);
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
               (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
    }

private:
    std::string path_;
    gzFile file_;
};

bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* s = cell.c_str();
    char* end = nullptr;
    out = std::strtod(s, &end);
    return end == s + cell.size() && std::isfinite(out);
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::Io, "cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && rows.empty()) continue;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

/// A header row is one where some column reads as text while the same
/// column in the next row reads as a number.
bool detect_header(const std::vector<std::vector<std::string>>& rows) {
    if (rows.size() < 2 || rows[0].size() != rows[1].size()) return false;
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
        double v;
        if (!parse_double(rows[0][c], v) && parse_double(rows[1][c], v)) return true;
    }
    return false;
}

std::size_t resolve_column(const std::string& ref, const std::vector<std::string>& header,
                           std::size_t n_columns) {
    if (!header.empty()) {
        auto it = std::find(header.begin(), header.end(), ref);
        if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    }
    char* end = nullptr;
    long idx = std::strtol(ref.c_str(), &end, 10);
    if (end != ref.c_str() && *end == '\0' && idx >= 0 && static_cast<std::size_t>(idx) < n_columns)
        return static_cast<std::size_t>(idx);
    fail(Errc::UnknownLabelColumn, "no column named or indexed '" + ref + "'");
}

std::vector<std::size_t> shuffled_indices(std::vector<std::size_t> idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.next_below(i)]);
    return idx;
}

/// Largest-remainder apportionment of round(fraction * total) picks over
/// per-class counts: floors first, then one extra to the largest
/// fractional remainders (ties to the lowest class id).
std::vector<std::size_t> class_quotas(const std::vector<std::size_t>& counts, double fraction) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
    std::vector<std::size_t> quota(counts.size());
    std::vector<double> remainder(counts.size());
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double exact = fraction * static_cast<double>(counts[k]);
        quota[k] = static_cast<std::size_t>(exact);
        remainder[k] = exact - static_cast<double>(quota[k]);
        assigned += quota[k];
    }
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < target && i < order.size(); ++i) {
        if (quota[order[i]] < counts[order[i]]) {
            ++quota[order[i]];
            ++assigned;
        }
    }
    return quota;
}

} // namespace

void Dataset::validate() const {
    if (features.rows() == 0 || features.cols() == 0) fail(Errc::EmptyDataset, "no data");
    if (labels.size() != features.rows()) fail(Errc::CountMismatch, "labels/features rows differ");
    if (n_classes <= 0) fail(Errc::EmptyDataset, "no classes");
    for (std::int32_t y : labels)
        if (y < 0 || y >= n_classes) fail(Errc::OutOfRange, "label outside [0, n_classes)");
    for (double v : features.data())
        if (!std::isfinite(v)) fail(Errc::NonNumericCell, "non-finite feature value");
    if (image_shape && image_shape->first * image_shape->second != features.cols())
        fail(Errc::DimensionMismatch, "image shape does not cover the feature count");
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    GzReader images(images_path);
    if (images.read_be32() != 0x00000803u)
        fail(Errc::BadMagic, images_path + " is not an IDX image file");
    const std::uint32_t n_images = images.read_be32();
    const std::uint32_t rows = images.read_be32();
    const std::uint32_t cols = images.read_be32();

    GzReader labels(labels_path);
    if (labels.read_be32() != 0x00000801u)
        fail(Errc::BadMagic, labels_path + " is not an IDX label file");
    const std::uint32_t n_labels = labels.read_be32();
    if (n_images != n_labels)
        fail(Errc::CountMismatch, "image and label counts differ");

    Dataset d;
    const std::size_t n_features = std::size_t(rows) * cols;
    d.features = Matrix(n_images, n_features);
    d.image_shape = {rows, cols};

    std::vector<unsigned char> buf(n_features);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        images.read_exact(buf.data(), buf.size());
        double* dst = d.features.row(i);
        for (std::size_t j = 0; j < n_features; ++j)
            dst[j] = static_cast<double>(buf[j]) / 255.0;
    }

    std::vector<unsigned char> raw_labels(n_labels);
    labels.read_exact(raw_labels.data(), raw_labels.size());
    d.labels.resize(n_labels);
    std::int32_t max_label = 0;
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        d.labels[i] = raw_labels[i];
        max_label = std::max(max_label, d.labels[i]);
    }
    d.n_classes = max_label + 1;
    d.validate();
    return d;
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const CsvOptions& options) {
    auto rows = read_csv_rows(path);
    if (rows.empty()) fail(Errc::EmptyDataset, path + " holds no rows");

    const std::size_t n_columns = rows[0].size();
    for (std::size_t r = 1; r < rows.size(); ++r)
        if (rows[r].size() != n_columns)
            fail(Errc::RaggedRow, path + " row " + std::to_string(r + 1) + " has " +
                                      std::to_string(rows[r].size()) + " cells, expected " +
                                      std::to_string(n_columns));

    std::vector<std::string> header;
    std::size_t first_data = 0;
    if (detect_header(rows)) {
        header = rows[0];
        first_data = 1;
    }
    const std::size_t n_rows = rows.size() - first_data;
    if (n_rows == 0) fail(Errc::EmptyDataset, path + " holds a header but no data");

    const std::size_t label_col = resolve_column(label_column, header, n_columns);

    // Per-column encoding: 0 numeric, 1 ordinal, 2 one-hot.
    std::vector<int> mode(n_columns, 0);
    for (const auto& [ref, value] : options.encodings) {
        const std::size_t c = resolve_column(ref, header, n_columns);
        if (value == "ordinal")
            mode[c] = 1;
        else if (value == "onehot")
            mode[c] = 2;
        else
            fail(Errc::BadConfig, "encoding for column '" + ref + "' must be ordinal or onehot");
    }

    // First-appearance value codes for encoded columns and the label.
    std::vector<std::unordered_map<std::string, std::int32_t>> codes(n_columns);
    std::vector<std::size_t> width(n_columns, 1);
    for (std::size_t c = 0; c < n_columns; ++c) {
        if (c == label_col || mode[c] == 0) continue;
        for (std::size_t r = first_data; r < rows.size(); ++r) {
            auto [it, fresh] = codes[c].try_emplace(rows[r][c], static_cast<std::int32_t>(codes[c].size()));
            (void)it;
            (void)fresh;
        }
        if (mode[c] == 2) width[c] = codes[c].size();
    }

    std::size_t n_features = 0;
    for (std::size_t c = 0; c < n_columns; ++c)
        if (c != label_col) n_features += width[c];
    if (n_features == 0) fail(Errc::EmptyDataset, path + " holds no feature columns");

    Dataset d;
    d.features = Matrix(n_rows, n_features);
    d.labels.resize(n_rows);
    std::unordered_map<std::string, std::int32_t> label_codes;

    for (std::size_t r = first_data; r < rows.size(); ++r) {
        const std::size_t i = r - first_data;
        double* dst = d.features.row(i);
        std::size_t out = 0;
        for (std::size_t c = 0; c < n_columns; ++c) {
            const std::string& cell = rows[r][c];
            if (c == label_col) {
                auto [it, fresh] = label_codes.try_emplace(cell, static_cast<std::int32_t>(label_codes.size()));
                if (fresh) d.label_names.push_back(cell);
                d.labels[i] = it->second;
                continue;
            }
            if (mode[c] == 0) {
                double v;
                if (!parse_double(cell, v))
                    fail(Errc::NonNumericCell, path + " row " + std::to_string(r + 1) + " column " +
                                                   std::to_string(c) + ": '" + cell +
                                                   "' is not numeric and no encoding is declared");
                dst[out++] = v;
            } else if (mode[c] == 1) {
                dst[out++] = static_cast<double>(codes[c].at(cell));
            } else {
                const auto hot = static_cast<std::size_t>(codes[c].at(cell));
                for (std::size_t j = 0; j < width[c]; ++j) dst[out++] = j == hot ? 1.0 : 0.0;
            }
        }
    }
    d.n_classes = static_cast<std::int32_t>(label_codes.size());
    d.validate();
    return d;
}

void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::Io, "cannot write " + path);
    for (std::size_t c = 0; c < d.n_features(); ++c) out << "f" << c << ",";
    out << "label\n";
    char buf[40];
    for (std::size_t i = 0; i < d.n_instances(); ++i) {
        const double* row = d.features.row(i);
        for (std::size_t c = 0; c < d.n_features(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out << buf << ",";
        }
        const auto y = static_cast<std::size_t>(d.labels[i]);
        if (y < d.label_names.size())
            out << d.label_names[y] << "\n";
        else
            out << d.labels[i] << "\n";
    }
    if (!out) fail(Errc::Io, "short write to " + path);
}

Dataset take(const Dataset& d, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.features = Matrix(rows.size(), d.n_features());
    out.labels.resize(rows.size());
    out.n_classes = d.n_classes;
    out.image_shape = d.image_shape;
    out.label_names = d.label_names;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= d.n_instances()) fail(Errc::OutOfRange, "row index beyond dataset");
        std::memcpy(out.features.row(i), d.features.row(rows[i]), d.n_features() * sizeof(double));
        out.labels[i] = d.labels[rows[i]];
    }
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& s) {
    if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0))
        fail(Errc::OutOfRange, "train_fraction outside (0, 1)");
    d.validate();

    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    if (s.stratified) {
        std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(d.n_classes));
        for (std::size_t i = 0; i < d.n_instances(); ++i)
            by_class[static_cast<std::size_t>(d.labels[i])].push_back(i);
        std::vector<std::size_t> counts;
        counts.reserve(by_class.size());
        for (std::size_t k = 0; k < by_class.size(); ++k) {
            if (by_class[k].size() == 1)
                fail(Errc::ClassWithSingleInstance,
                     "class " + std::to_string(k) + " has a single instance");
            counts.push_back(by_class[k].size());
        }
        const std::vector<std::size_t> quota = class_quotas(counts, s.train_fraction);
        for (std::size_t k = 0; k < by_class.size(); ++k) {
            Rng rng(mix_seed(s.seed, k));
            auto idx = shuffled_indices(by_class[k], rng);
            for (std::size_t i = 0; i < idx.size(); ++i)
                (i < quota[k] ? train_rows : test_rows).push_back(idx[i]);
        }
    } else {
        std::vector<std::size_t> idx(d.n_instances());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng(mix_seed(s.seed, 0));
        idx = shuffled_indices(std::move(idx), rng);
        const auto n_train = static_cast<std::size_t>(
            std::llround(s.train_fraction * static_cast<double>(d.n_instances())));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? train_rows : test_rows).push_back(idx[i]);
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {take(d, train_rows), take(d, test_rows)};
}

Dataset subsample(const Dataset& d, double fraction, std::uint64_t seed) {
    if (fraction >= 1.0) return d;
    auto [kept, dropped] = split(d, SplitSpec{fraction, seed, true});
    (void)dropped;
    return kept;
}

} // namespace hwforest

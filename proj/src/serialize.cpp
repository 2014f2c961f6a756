#include "hwforest/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace hwforest {

namespace {

constexpr std::uint32_t kMagic = 0x4857464du; // "HWFM" big-endian spelling
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }
    void size(std::size_t v) { u64(static_cast<std::uint64_t>(v)); }

    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& bytes) : data_(bytes) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(byte()); }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(byte()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(byte()) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::size_t size() { return static_cast<std::size_t>(u64()); }

    void done() const {
        if (pos_ != data_.size()) fail(Errc::BadMagic, "trailing bytes after model payload");
    }

private:
    unsigned char byte() {
        if (pos_ >= data_.size()) fail(Errc::TruncatedFile, "model payload ended early");
        return static_cast<unsigned char>(data_[pos_++]);
    }

    const std::string& data_;
    std::size_t pos_ = 0;
};

void write_forest(Writer& w, const ForestModel& f) {
    w.u8(static_cast<std::uint8_t>(f.kind));
    w.i32(f.n_classes);
    w.size(f.n_features);
    w.u64(f.seed);
    w.size(f.trees.size());
    for (const Tree& t : f.trees) {
        w.size(t.nodes.size());
        for (const TreeNode& n : t.nodes) {
            w.f64(n.threshold);
            w.i32(n.feature);
            w.i32(n.left);
            w.i32(n.count);
        }
        w.size(t.mixed_counts.size());
        for (std::int32_t c : t.mixed_counts) w.i32(c);
    }
}

ForestModel read_forest(Reader& r) {
    ForestModel f;
    f.kind = static_cast<ForestKind>(r.u8());
    f.n_classes = r.i32();
    f.n_features = r.size();
    f.seed = r.u64();
    f.trees.resize(r.size());
    for (Tree& t : f.trees) {
        t.nodes.resize(r.size());
        for (TreeNode& n : t.nodes) {
            n.threshold = r.f64();
            n.feature = r.i32();
            n.left = r.i32();
            n.count = r.i32();
        }
        t.mixed_counts.resize(r.size());
        for (std::int32_t& c : t.mixed_counts) c = r.i32();
    }
    return f;
}

void write_grain(Writer& w, const GrainModel& g) {
    w.size(g.config.window);
    w.size(g.config.stride);
    w.size(g.config.n_trees_per_forest);
    w.u8(g.config.hash_screen ? 1 : 0);
    w.f64(g.config.patch_subsample);
    w.size(g.config.min_leaf);
    w.size(g.image_height);
    w.size(g.image_width);
    w.size(g.n_locations);
    w.size(g.threshold.order.size());
    for (std::size_t v : g.threshold.order) w.size(v);
    w.f64(g.threshold.total_mass);
    for (std::uint32_t v : g.threshold.n_table) w.u32(v);
    w.i32(g.threshold.p);
    w.f64(g.threshold.ht);
    w.size(g.threshold.keep.size());
    for (std::size_t v : g.threshold.keep) w.size(v);
    w.size(g.retained_locations.size());
    for (std::size_t v : g.retained_locations) w.size(v);
    w.size(g.forests.size());
    for (const ForestModel& f : g.forests) write_forest(w, f);
}

GrainModel read_grain(Reader& r) {
    GrainModel g;
    g.config.window = r.size();
    g.config.stride = r.size();
    g.config.n_trees_per_forest = r.size();
    g.config.hash_screen = r.u8() != 0;
    g.config.patch_subsample = r.f64();
    g.config.min_leaf = r.size();
    g.image_height = r.size();
    g.image_width = r.size();
    g.n_locations = r.size();
    g.threshold.order.resize(r.size());
    for (std::size_t& v : g.threshold.order) v = r.size();
    g.threshold.total_mass = r.f64();
    for (std::uint32_t& v : g.threshold.n_table) v = r.u32();
    g.threshold.p = r.i32();
    g.threshold.ht = r.f64();
    g.threshold.keep.resize(r.size());
    for (std::size_t& v : g.threshold.keep) v = r.size();
    g.retained_locations.resize(r.size());
    for (std::size_t& v : g.retained_locations) v = r.size();
    g.forests.resize(r.size());
    for (ForestModel& f : g.forests) f = read_forest(r);
    return g;
}

void write_cv_forest(Writer& w, const CvForest& f) {
    w.u8(static_cast<std::uint8_t>(f.kind));
    w.i32(f.n_classes);
    w.size(f.fold_models.size());
    for (const ForestModel& m : f.fold_models) write_forest(w, m);
}

CvForest read_cv_forest(Reader& r) {
    CvForest f;
    f.kind = static_cast<ForestKind>(r.u8());
    f.n_classes = r.i32();
    f.fold_models.resize(r.size());
    for (ForestModel& m : f.fold_models) m = read_forest(r);
    return f;
}

} // namespace

std::string serialize_model(const CascadeModel& m) {
    Writer w;
    w.u32(kMagic);
    w.u32(kVersion);
    w.i32(m.n_classes);
    w.size(m.raw_width);
    w.size(m.base_width);
    w.size(m.label_names.size());
    for (const std::string& name : m.label_names) {
        w.size(name.size());
        for (char ch : name) w.u8(static_cast<std::uint8_t>(ch));
    }

    const CascadeConfig& c = m.config;
    w.size(c.n_random_forests);
    w.size(c.n_completely_random_forests);
    w.size(c.trees_per_forest);
    w.size(c.cv_folds);
    w.size(c.max_levels);
    w.u8(static_cast<std::uint8_t>(c.screening));
    w.size(c.binning_bins);
    w.f64(c.error_shrink);
    w.size(c.min_leaf);
    w.u64(c.seed);
    w.f64(c.validation_fraction);
    w.size(c.grains.size());
    for (const GrainConfig& g : c.grains) {
        w.size(g.window);
        w.size(g.stride);
        w.size(g.n_trees_per_forest);
        w.u8(g.hash_screen ? 1 : 0);
        w.f64(g.patch_subsample);
        w.size(g.min_leaf);
    }

    w.size(m.scan.grains.size());
    for (const GrainModel& g : m.scan.grains) write_grain(w, g);

    w.size(m.levels.size());
    for (const CascadeLevel& level : m.levels) {
        w.f64(level.wt);
        w.f64(level.ta);
        w.f64(level.oof_accuracy);
        w.size(level.n_entering);
        w.size(level.n_retired);
        w.size(level.forests.size());
        for (const CvForest& f : level.forests) write_cv_forest(w, f);
    }
    return w.take();
}

CascadeModel parse_model(const std::string& bytes) {
    Reader r(bytes);
    if (r.u32() != kMagic) fail(Errc::BadMagic, "not a model file");
    if (r.u32() != kVersion) fail(Errc::BadMagic, "unsupported model version");

    CascadeModel m;
    m.n_classes = r.i32();
    m.raw_width = r.size();
    m.base_width = r.size();
    m.label_names.resize(r.size());
    for (std::string& name : m.label_names) {
        name.resize(r.size());
        for (char& ch : name) ch = static_cast<char>(r.u8());
    }

    CascadeConfig& c = m.config;
    c.n_random_forests = r.size();
    c.n_completely_random_forests = r.size();
    c.trees_per_forest = r.size();
    c.cv_folds = r.size();
    c.max_levels = r.size();
    c.screening = static_cast<ScreeningKind>(r.u8());
    c.binning_bins = r.size();
    c.error_shrink = r.f64();
    c.min_leaf = r.size();
    c.seed = r.u64();
    c.validation_fraction = r.f64();
    c.grains.resize(r.size());
    for (GrainConfig& g : c.grains) {
        g.window = r.size();
        g.stride = r.size();
        g.n_trees_per_forest = r.size();
        g.hash_screen = r.u8() != 0;
        g.patch_subsample = r.f64();
        g.min_leaf = r.size();
    }

    m.scan.grains.resize(r.size());
    for (GrainModel& g : m.scan.grains) g = read_grain(r);

    m.levels.resize(r.size());
    for (CascadeLevel& level : m.levels) {
        level.wt = r.f64();
        level.ta = r.f64();
        level.oof_accuracy = r.f64();
        level.n_entering = r.size();
        level.n_retired = r.size();
        level.forests.resize(r.size());
        for (CvForest& f : level.forests) f = read_cv_forest(r);
    }
    r.done();
    return m;
}

void save_model(const CascadeModel& m, const std::string& path) {
    const std::string payload = serialize_model(m);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(Errc::Io, "cannot write " + tmp);
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (!out) fail(Errc::Io, "short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        fail(Errc::Io, "cannot move " + tmp + " into place");
    }
}

CascadeModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Io, "cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_model(bytes);
}

} // namespace hwforest

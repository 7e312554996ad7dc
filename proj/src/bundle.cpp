#include "scene/bundle.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "scene/error.hpp"
#include "scene/image_io.hpp"

namespace scene {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > bytes_.size() - pos_) throw DataError("container: truncated data");
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint32_t u32() {
        auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        auto s = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
        return v;
    }
    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

Blob make_blob(std::string name, std::size_t rows, std::size_t cols, std::span<const double> data) {
    if (data.size() != rows * cols) throw ContractError("blob '" + name + "': size mismatch");
    return {std::move(name), rows, cols, std::vector<double>(data.begin(), data.end())};
}

template <std::size_t N>
void copy_into(std::array<double, N>& dst, const Blob& b) {
    if (b.data.size() != N) throw DataError("bundle: blob '" + b.name + "' has the wrong length");
    std::copy(b.data.begin(), b.data.end(), dst.begin());
}

nlohmann::json counts_json(const CategoryCounts& c) {
    return {{"category", c.category}, {"train", c.train}, {"test", c.test}, {"correct", c.correct}};
}

}  // namespace

std::vector<std::uint8_t> encode_container(std::string_view magic, std::uint32_t version, nlohmann::json header,
                                           const std::vector<Blob>& blobs) {
    if (magic.size() != 8) throw ContractError("container magic must be 8 bytes");
    nlohmann::json index = nlohmann::json::array();
    for (const auto& b : blobs) {
        if (b.data.size() != b.rows * b.cols) throw ContractError("blob '" + b.name + "': size mismatch");
        index.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
    }
    header["blobs"] = std::move(index);
    const std::string text = header.dump();

    std::vector<std::uint8_t> out(magic.begin(), magic.end());
    put_u32(out, version);
    put_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    for (const auto& b : blobs) {
        put_u64(out, b.rows);
        put_u64(out, b.cols);
        for (double v : b.data) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

const Blob& DecodedContainer::blob(std::string_view name) const {
    for (const auto& b : blobs)
        if (b.name == name) return b;
    throw DataError("container: missing blob '" + std::string(name) + "'");
}

DecodedContainer decode_container(std::span<const std::uint8_t> bytes, std::string_view magic,
                                  std::uint32_t expected_version) {
    Reader r(bytes);
    const auto m = r.take(magic.size());
    if (!std::equal(m.begin(), m.end(), magic.begin()))
        throw DataError("container: bad magic, expected " + std::string(magic));
    DecodedContainer out;
    out.version = r.u32();
    if (out.version != expected_version)
        throw DataError("container: format version " + std::to_string(out.version) + " is not supported (expected " +
                        std::to_string(expected_version) + ")");
    const std::uint64_t header_len = r.u64();
    const auto text = r.take(static_cast<std::size_t>(header_len));
    try {
        out.header = nlohmann::json::parse(text.begin(), text.end());
        for (const auto& entry : out.header.at("blobs")) {
            Blob b;
            b.name = entry.at("name").get<std::string>();
            b.rows = static_cast<std::size_t>(r.u64());
            b.cols = static_cast<std::size_t>(r.u64());
            if (b.rows != entry.at("rows").get<std::size_t>() || b.cols != entry.at("cols").get<std::size_t>())
                throw DataError("container: blob '" + b.name + "' dimensions disagree with the header");
            if (b.cols != 0 && b.rows > (bytes.size() / 8) / b.cols) throw DataError("container: truncated data");
            b.data.resize(b.rows * b.cols);
            for (auto& v : b.data) v = std::bit_cast<double>(r.u64());
            out.blobs.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("container: bad header: ") + e.what());
    }
    if (!r.done()) throw DataError("container: trailing bytes");
    out.header.erase("blobs");
    return out;
}

std::vector<std::uint8_t> serialize(const ModelBundle& b) {
    // Thread count is an execution setting; it must not change the bundle bytes.
    nlohmann::json model_config = to_json(b.config);
    model_config.erase("jobs");
    const PlsaModel& m = b.plsa;
    nlohmann::json choice = nlohmann::json::array();
    for (const auto& [category, strategy] : b.strategy_map.choice)
        choice.push_back({{"category", category}, {"strategy", std::string(to_string(strategy))}});
    nlohmann::json provenance_rows = nlohmann::json::array();
    for (const auto& row : b.strategy_map.provenance) provenance_rows.push_back(counts_json(row));
    nlohmann::json confusion_json = nlohmann::json::object();
    for (auto c : kCombinations) {
        const ConfusionTable& t = b.pretest_confusion[static_cast<std::size_t>(c)];
        confusion_json[std::string(to_string(c))] = {
            {"categories", t.categories}, {"counts", t.counts}, {"correct", t.correct}, {"total", t.total}};
    }
    const PaddingClassifier& clf = b.classifier;

    nlohmann::json header = {
        {"format", "scene-annotate-bundle"},
        {"categories", b.category_names},
        {"topic_category", b.topic_category},
        {"plsa",
         {{"topics", m.topics},
          {"features", m.features},
          {"regions", m.regions},
          {"seed", m.seed},
          {"iterations", m.iterations},
          {"tol", m.tol},
          {"restarts", m.restarts},
          {"warnings", m.warnings}}},
        {"strategy_map",
         {{"choice", choice}, {"unmappable", b.strategy_map.unmappable}, {"provenance", provenance_rows}}},
        {"classifier",
         {{"bias", clf.bias},
          {"reg", clf.reg},
          {"epochs", clf.epochs},
          {"seed", clf.seed},
          {"degenerate", clf.degenerate},
          {"training_accuracy", clf.training_accuracy}}},
        {"config", model_config},
        {"provenance",
         {{"seed", b.provenance.seed},
          {"dataset_hash", b.provenance.dataset_hash},
          {"train_regions", b.provenance.train_regions},
          {"pretest_regions", b.provenance.pretest_regions},
          {"skipped_regions", b.provenance.skipped_regions}}},
        {"pretest_confusion", confusion_json},
    };
    std::vector<Blob> blobs;
    blobs.push_back(make_blob("p_f_given_z", m.topics, m.features, m.p_f_given_z));
    blobs.push_back(make_blob("p_z_given_r", m.regions, m.topics, m.p_z_given_r));
    blobs.push_back(make_blob("p_r", m.regions, 1, m.p_r));
    blobs.push_back(make_blob("loglik_trace", m.loglik_trace.size(), 1, m.loglik_trace));
    blobs.push_back(make_blob("classifier_weights", 1, clf.weights.size(), clf.weights));
    blobs.push_back(make_blob("classifier_mean", 1, clf.mean.size(), clf.mean));
    blobs.push_back(make_blob("classifier_scale", 1, clf.scale.size(), clf.scale));
    return encode_container(kBundleMagic, kBundleVersion, std::move(header), blobs);
}

ModelBundle deserialize(std::span<const std::uint8_t> bytes) {
    const DecodedContainer c = decode_container(bytes, kBundleMagic, kBundleVersion);
    const auto& h = c.header;
    ModelBundle b;
    try {
        if (h.at("format").get<std::string>() != "scene-annotate-bundle") throw DataError("bundle: wrong format tag");
        b.category_names = h.at("categories").get<std::vector<std::string>>();
        b.topic_category = h.at("topic_category").get<std::vector<int>>();

        const auto& p = h.at("plsa");
        PlsaModel& m = b.plsa;
        m.topics = p.at("topics").get<std::size_t>();
        m.features = p.at("features").get<std::size_t>();
        m.regions = p.at("regions").get<std::size_t>();
        m.seed = p.at("seed").get<std::uint64_t>();
        m.iterations = p.at("iterations").get<int>();
        m.tol = p.at("tol").get<double>();
        m.restarts = p.at("restarts").get<int>();
        m.warnings = p.at("warnings").get<std::vector<std::string>>();
        m.p_f_given_z = c.blob("p_f_given_z").data;
        m.p_z_given_r = c.blob("p_z_given_r").data;
        m.p_r = c.blob("p_r").data;
        m.loglik_trace = c.blob("loglik_trace").data;
        if (m.p_f_given_z.size() != m.topics * m.features || m.p_z_given_r.size() != m.regions * m.topics ||
            m.p_r.size() != m.regions)
            throw DataError("bundle: pLSA matrices disagree with the declared shape");
        if (b.topic_category.size() != m.topics) throw DataError("bundle: topic map size differs from topic count");

        const auto& sm = h.at("strategy_map");
        for (const auto& e : sm.at("choice"))
            b.strategy_map.choice[e.at("category").get<int>()] =
                parse_padding_strategy(e.at("strategy").get<std::string>());
        b.strategy_map.unmappable = sm.at("unmappable").get<std::vector<int>>();
        for (const auto& e : sm.at("provenance")) {
            CategoryCounts row;
            row.category = e.at("category").get<int>();
            row.train = e.at("train").get<int>();
            row.test = e.at("test").get<int>();
            row.correct = e.at("correct").get<std::array<int, 4>>();
            b.strategy_map.provenance.push_back(row);
        }

        const auto& cl = h.at("classifier");
        PaddingClassifier& clf = b.classifier;
        clf.bias = cl.at("bias").get<double>();
        clf.reg = cl.at("reg").get<double>();
        clf.epochs = cl.at("epochs").get<int>();
        clf.seed = cl.at("seed").get<std::uint64_t>();
        clf.degenerate = cl.at("degenerate").get<bool>();
        clf.training_accuracy = cl.at("training_accuracy").get<double>();
        copy_into(clf.weights, c.blob("classifier_weights"));
        copy_into(clf.mean, c.blob("classifier_mean"));
        copy_into(clf.scale, c.blob("classifier_scale"));

        apply_json(b.config, h.at("config"));

        const auto& pv = h.at("provenance");
        b.provenance.seed = pv.at("seed").get<std::uint64_t>();
        b.provenance.dataset_hash = pv.at("dataset_hash").get<std::string>();
        b.provenance.train_regions = pv.at("train_regions").get<long>();
        b.provenance.pretest_regions = pv.at("pretest_regions").get<long>();
        b.provenance.skipped_regions = pv.at("skipped_regions").get<long>();

        const auto& cf = h.at("pretest_confusion");
        for (auto combo : kCombinations) {
            const auto& t = cf.at(std::string(to_string(combo)));
            ConfusionTable& dst = b.pretest_confusion[static_cast<std::size_t>(combo)];
            dst.categories = t.at("categories").get<int>();
            dst.counts = t.at("counts").get<std::vector<long>>();
            dst.correct = t.at("correct").get<long>();
            dst.total = t.at("total").get<long>();
            if (dst.counts.size() != static_cast<std::size_t>(dst.categories) * static_cast<std::size_t>(dst.categories))
                throw DataError("bundle: confusion table shape mismatch");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bundle: malformed header: ") + e.what());
    }
    return b;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
    const auto bytes = serialize(bundle);
    write_file_atomic(path, bytes.data(), bytes.size());
}

ModelBundle load_bundle(const std::filesystem::path& path) { return deserialize(read_binary_file(path)); }

}  // namespace scene

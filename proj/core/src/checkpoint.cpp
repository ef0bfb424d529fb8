#include "bargrain/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "bargrain/errors.hpp"

namespace bargrain {

namespace {

constexpr char kMagic[8] = {'B', 'R', 'G', 'R', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::vector<unsigned char>& buf, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
    buf.insert(buf.end(), std::begin(bytes), std::end(bytes));
}

class Reader {
public:
    Reader(std::vector<unsigned char> data, std::string source) : data_(std::move(data)), source_(std::move(source)) {}

    template <class T>
    T get() {
        if (pos_ + sizeof(T) > data_.size()) throw LoadError(source_ + ": truncated checkpoint");
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, bytes, sizeof(T));
        return value;
    }

    void expect_magic() {
        if (data_.size() < sizeof kMagic || std::memcmp(data_.data(), kMagic, sizeof kMagic) != 0) {
            throw LoadError(source_ + ": not a bargrain checkpoint");
        }
        pos_ = sizeof kMagic;
    }

    bool at_end() const { return pos_ == data_.size(); }
    const std::string& source() const { return source_; }

private:
    std::vector<unsigned char> data_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const ModelState& state, const std::filesystem::path& path) {
    std::vector<unsigned char> buf(std::begin(kMagic), std::end(kMagic));
    const auto& c = state.config;
    put<std::uint32_t>(buf, kCheckpointVersion);
    for (std::uint64_t v : {c.n_rois, c.t_steps, c.d_h, c.hidden, c.out, c.classifier_hidden}) put(buf, v);
    put<double>(buf, c.threshold_c);
    put<double>(buf, c.tau);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(c.mode));
    put<std::uint64_t>(buf, c.seed);

    const auto params = state.parameters();
    put<std::uint64_t>(buf, params.size());
    for (const auto& p : params) {
        put<std::uint64_t>(buf, p.rows());
        put<std::uint64_t>(buf, p.cols());
        for (double v : p.values()) put(buf, v);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw LoadError("failed writing checkpoint " + path.string());
}

ModelState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open checkpoint " + path.string());
    Reader r(std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {}), path.string());
    r.expect_magic();

    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw LoadError(r.source() + ": unsupported checkpoint version " + std::to_string(version));
    }
    ModelConfig c;
    c.n_rois = r.get<std::uint64_t>();
    c.t_steps = r.get<std::uint64_t>();
    c.d_h = r.get<std::uint64_t>();
    c.hidden = r.get<std::uint64_t>();
    c.out = r.get<std::uint64_t>();
    c.classifier_hidden = r.get<std::uint64_t>();
    c.threshold_c = r.get<double>();
    c.tau = r.get<double>();
    const auto mode = r.get<std::uint32_t>();
    if (mode > 3) throw LoadError(r.source() + ": invalid mode tag " + std::to_string(mode));
    c.mode = static_cast<AblationMode>(mode);
    c.seed = r.get<std::uint64_t>();
    try {
        c.validate();
    } catch (const ValidationError& e) {
        throw LoadError(r.source() + ": " + e.what());
    }

    // Shapes come from a freshly initialized state; values are overwritten.
    ModelState state = ModelState::initialize(c);
    auto params = state.parameters();
    const auto count = r.get<std::uint64_t>();
    if (count != params.size()) {
        throw LoadError(r.source() + ": expected " + std::to_string(params.size()) + " parameter matrices, found " +
                        std::to_string(count));
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto rows = r.get<std::uint64_t>();
        const auto cols = r.get<std::uint64_t>();
        if (rows != params[k].rows() || cols != params[k].cols()) {
            throw LoadError(r.source() + ": parameter " + std::to_string(k) + " has shape " +
                            shape_string(rows, cols) + ", configuration implies " +
                            shape_string(params[k].rows(), params[k].cols()));
        }
        for (double& v : params[k].mutable_values()) v = r.get<double>();
    }
    if (!r.at_end()) throw LoadError(r.source() + ": trailing bytes after parameters");
    return state;
}

ModelState load_checkpoint(const std::filesystem::path& path, std::size_t n_rois, std::size_t t_steps) {
    ModelState state = load_checkpoint(path);
    if (state.config.n_rois != n_rois || state.config.t_steps != t_steps) {
        throw LoadError(path.string() + ": checkpoint expects " +
                        shape_string(state.config.n_rois, state.config.t_steps) + " subjects, data is " +
                        shape_string(n_rois, t_steps));
    }
    return state;
}

}  // namespace bargrain

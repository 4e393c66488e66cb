#include "tsr/error.hpp"
#include "tsr/regressor.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace tsr::regressor {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'R', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ParseError("checkpoint: unexpected end of data");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto n = get_le<std::uint32_t>(in);
    if (n > (1u << 24)) throw ParseError("checkpoint: string length out of range");
    std::string s(n, '\0');
    if (!in.read(s.data(), n)) throw ParseError("checkpoint: unexpected end of data");
    return s;
}

} // namespace

void save_checkpoint(const Model& model, std::ostream& out) {
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kVersion);
    put_string(out, config_to_json(model.config()));
    const ParamStore& store = model.params();
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.tensors().size()));
    for (std::size_t h = 0; h < store.tensors().size(); ++h) {
        const TensorInfo& t = store.tensors()[h];
        put_string(out, t.name);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rows));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.cols));
        const ConstMatView v = store.value(h);
        for (std::size_t i = 0; i < v.size(); ++i) put_le<double>(out, v.data[i]);
    }
    if (!out) throw Error("checkpoint: write failed");
}

Model load_checkpoint(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("checkpoint: bad magic");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kVersion) throw ParseError("checkpoint: unsupported version " + std::to_string(version));
    Model model(config_from_json(get_string(in)));
    ParamStore& store = model.params();
    const auto count = get_le<std::uint32_t>(in);
    if (count != store.tensors().size()) {
        throw ParseError("checkpoint: " + std::to_string(count) + " tensors, model expects " +
                         std::to_string(store.tensors().size()));
    }
    for (std::size_t h = 0; h < count; ++h) {
        const TensorInfo& t = store.tensors()[h];
        const std::string name = get_string(in);
        const auto rows = get_le<std::uint32_t>(in);
        const auto cols = get_le<std::uint32_t>(in);
        if (name != t.name || rows != t.rows || cols != t.cols) {
            throw ParseError("checkpoint: tensor " + name + " does not match model tensor " + t.name);
        }
        MatView v = store.value(h);
        for (std::size_t i = 0; i < v.size(); ++i) v.data[i] = get_le<double>(in);
    }
    return model;
}

void save_checkpoint_file(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    save_checkpoint(model, out);
}

Model load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return load_checkpoint(in);
}

} // namespace tsr::regressor

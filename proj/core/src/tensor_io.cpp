#include "av2t/tensor_io.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace av2t {
namespace {

static_assert(std::endian::native == std::endian::little, "container IO assumes a little-endian host");

constexpr char kMagic[8] = {'A', 'V', '2', 'T', 'T', 'N', 'S', 'R'};

template <class T>
void put(std::vector<std::byte>& out, const T& v) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::vector<std::byte>& in, std::size_t& pos, const std::filesystem::path& path) {
    if (pos + sizeof(T) > in.size()) throw FormatError(fmt::format("{}: truncated container", path.string()));
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

void write_container(const std::filesystem::path& path, const Json& meta, const TensorMap& tensors) {
    Json table = Json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, m] : tensors) {
        const std::uint64_t nbytes = static_cast<std::uint64_t>(m.size()) * sizeof(double);
        table.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}, {"nbytes", nbytes}});
        offset += nbytes;
    }
    Json header = {{"meta", meta}, {"tensors", table}};
    const std::string text = header.dump();

    std::vector<std::byte> out;
    out.reserve(32 + text.size() + offset);
    for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
    put(out, kContainerVersion);
    put(out, static_cast<std::uint64_t>(text.size()));
    for (char c : text) out.push_back(static_cast<std::byte>(c));
    for (const auto& [name, m] : tensors) {
        const auto* p = reinterpret_cast<const std::byte*>(m.data());
        out.insert(out.end(), p, p + m.size() * sizeof(double));
    }
    put(out, fnv1a(out));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
        f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
        if (!f) throw std::runtime_error(fmt::format("write failed for {}", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

Container read_container(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError(fmt::format("{}: cannot open", path.string()));
    std::vector<char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::vector<std::byte> in(raw.size());
    std::memcpy(in.data(), raw.data(), raw.size());

    if (in.size() < sizeof(kMagic) + 4 + 8 + 8 || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
        throw FormatError(fmt::format("{}: not a tensor container or truncated", path.string()));

    std::size_t pos = sizeof(kMagic);
    const auto version = get<std::uint32_t>(in, pos, path);
    if (version != kContainerVersion)
        throw FormatError(fmt::format("{}: container version {} unsupported (expected {})", path.string(), version,
                                      kContainerVersion));

    const std::size_t body_end = in.size() - sizeof(std::uint64_t);
    std::uint64_t stored = 0;
    std::memcpy(&stored, in.data() + body_end, sizeof stored);
    if (fnv1a(std::span<const std::byte>(in.data(), body_end)) != stored)
        throw FormatError(fmt::format("{}: checksum mismatch (truncated or corrupt)", path.string()));

    const auto header_len = get<std::uint64_t>(in, pos, path);
    if (pos + header_len > body_end) throw FormatError(fmt::format("{}: truncated header", path.string()));
    const std::string text(reinterpret_cast<const char*>(in.data() + pos), header_len);
    pos += header_len;

    Container c;
    Json header;
    try {
        header = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("{}: malformed header: {}", path.string(), e.what()));
    }
    c.meta = header.at("meta");
    const std::size_t data_begin = pos;
    for (const auto& t : header.at("tensors")) {
        const auto rows = t.at("rows").get<Eigen::Index>();
        const auto cols = t.at("cols").get<Eigen::Index>();
        const auto offset = t.at("offset").get<std::uint64_t>();
        const auto nbytes = t.at("nbytes").get<std::uint64_t>();
        if (nbytes != static_cast<std::uint64_t>(rows * cols) * sizeof(double) || data_begin + offset + nbytes > body_end)
            throw FormatError(fmt::format("{}: tensor '{}' out of bounds", path.string(), t.at("name").get<std::string>()));
        Matrix m(rows, cols);
        std::memcpy(m.data(), in.data() + data_begin + offset, nbytes);
        c.tensors.emplace(t.at("name").get<std::string>(), std::move(m));
    }
    return c;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
        f << text;
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace av2t

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "nngsat/mpnn.hpp"

namespace nngsat {

namespace {

constexpr char kMagic[8] = {'N', 'N', 'G', 'M', 'P', 'N', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                          (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
    os.write((const char*)b, 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read((char*)b, 4);
    if (!is) throw std::runtime_error("checkpoint: truncated header");
    return (std::uint32_t)b[0] | ((std::uint32_t)b[1] << 8) | ((std::uint32_t)b[2] << 16) |
           ((std::uint32_t)b[3] << 24);
}

}  // namespace

void save_checkpoint(const MpnnModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, (std::uint32_t)model.d);
    auto params = model.params();
    put_u32(os, (std::uint32_t)params.size());
    for (const Mat* p : params) {
        put_u32(os, (std::uint32_t)p->rows());
        put_u32(os, (std::uint32_t)p->cols());
    }
    os.write((const char*)&model.temperature, sizeof(double));
    for (const Mat* p : params) {
        // Eigen default storage is column-major; serialize as stored.
        os.write((const char*)p->data(), (std::streamsize)(p->size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

MpnnModel load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    std::uint32_t d = get_u32(is);
    if (d == 0 || d > 4096) throw std::runtime_error("checkpoint: implausible width");

    MpnnModel model = MpnnModel::init((int)d, 0);
    auto params = model.params();
    std::uint32_t n = get_u32(is);
    if (n != params.size())
        throw std::runtime_error("checkpoint: parameter count mismatch (file " +
                                 std::to_string(n) + ", expected " +
                                 std::to_string(params.size()) + ")");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(n);
    for (auto& [r, c] : shapes) {
        r = get_u32(is);
        c = get_u32(is);
    }
    is.read((char*)&model.temperature, sizeof(double));
    if (!is) throw std::runtime_error("checkpoint: truncated header");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if ((std::uint32_t)params[i]->rows() != shapes[i].first ||
            (std::uint32_t)params[i]->cols() != shapes[i].second)
            throw std::runtime_error("checkpoint: shape mismatch at parameter " +
                                     std::to_string(i));
        is.read((char*)params[i]->data(),
                (std::streamsize)(params[i]->size() * sizeof(double)));
        if (!is) throw std::runtime_error("checkpoint: truncated body");
    }
    is.peek();
    if (!is.eof()) throw std::runtime_error("checkpoint: trailing bytes in " + path);
    return model;
}

}  // namespace nngsat

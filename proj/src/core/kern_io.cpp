#include "glkm/core/kern_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace glkm {

Kernel delta_kernel(int size) {
    require(size >= 1, "delta_kernel: size must be >= 1");
    Kernel k(size, size);
    k.at(size / 2, size / 2) = 1.0f;
    return k;
}

bool kernel_valid(const Kernel& k, float tol) {
    if (k.h < 1 || k.w < 1 || k.v.size() != (std::size_t)k.h * k.w) return false;
    double sum = 0.0;
    for (float x : k.v) {
        if (!(x >= 0.0f) || !std::isfinite(x)) return false;
        sum += x;
    }
    return std::fabs(sum - 1.0) <= (double)tol;
}

void require_kernel(const Kernel& k) {
    require(kernel_valid(k), "kernel invariant violated (negative taps or mass != 1)");
}

Kernel normalize_kernel(Kernel k) {
    double sum = 0.0;
    for (float& x : k.v) {
        if (x < 0.0f) x = 0.0f;
        sum += x;
    }
    if (sum <= 0.0) return delta_kernel(k.h);
    // Renormalize in double, then push residual into the largest tap so the
    // float sum is exact.
    std::size_t imax = 0;
    for (std::size_t i = 0; i < k.v.size(); ++i) {
        k.v[i] = (float)(k.v[i] / sum);
        if (k.v[i] > k.v[imax]) imax = i;
    }
    double s2 = 0.0;
    for (float x : k.v) s2 += x;
    k.v[imax] += (float)(1.0 - s2);
    return k;
}

double kernel_l1(const Kernel& a, const Kernel& b) {
    require(a.h == b.h && a.w == b.w, "kernel_l1: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += std::fabs((double)a.v[i] - b.v[i]);
    return s;
}

namespace {

constexpr char kMagic[4] = {'K', 'E', 'R', 'N'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {(unsigned char)(v & 0xff), (unsigned char)(v >> 8)};
    os.write((const char*)b, 2);
}
void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = (unsigned char)((v >> (8 * i)) & 0xff);
    os.write((const char*)b, 4);
}
void put_f32(std::ostream& os, const float* p, std::size_t n) {
    // Little-endian host assumed (checked at startup in practice); raw write.
    os.write((const char*)p, (std::streamsize)(n * sizeof(float)));
}
std::uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    is.read((char*)b, 2);
    return (std::uint16_t)(b[0] | (b[1] << 8));
}
std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read((char*)b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= (std::uint32_t)b[i] << (8 * i);
    return v;
}

void read_header(std::istream& is, const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    require_io(is.good() && std::memcmp(magic, kMagic, 4) == 0,
               "KERN: bad magic in " + path);
    const std::uint16_t ver = get_u16(is);
    require_io(ver == kVersion, "KERN: unsupported version in " + path);
}

Kernel read_kernel_body(std::istream& is, const std::string& path) {
    const std::uint32_t h = get_u32(is);
    const std::uint32_t w = get_u32(is);
    require_io(is.good() && h >= 1 && w >= 1 && h <= 1u << 16 && w <= 1u << 16,
               "KERN: bad dimensions in " + path);
    Kernel k((int)h, (int)w);
    is.read((char*)k.v.data(), (std::streamsize)(k.v.size() * sizeof(float)));
    require_io(is.good(), "KERN: truncated data in " + path);
    return k;
}

class AtomicFile {
public:
    explicit AtomicFile(const std::string& path) : path_(path), tmp_(path + ".tmp") {
        os_.open(tmp_, std::ios::binary | std::ios::trunc);
        require_io(os_.is_open(), "cannot open for write: " + tmp_);
    }
    std::ofstream& stream() { return os_; }
    void commit() {
        os_.close();
        require_io(!os_.fail(), "write failed: " + tmp_);
        std::filesystem::rename(tmp_, path_);
        committed_ = true;
    }
    ~AtomicFile() {
        if (!committed_) {
            os_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

private:
    std::string path_, tmp_;
    std::ofstream os_;
    bool committed_ = false;
};

} // namespace

void save_kern(const Kernel& k, const std::string& path) {
    AtomicFile f(path);
    f.stream().write(kMagic, 4);
    put_u16(f.stream(), kVersion);
    put_u32(f.stream(), (std::uint32_t)k.h);
    put_u32(f.stream(), (std::uint32_t)k.w);
    put_f32(f.stream(), k.v.data(), k.v.size());
    f.commit();
}

Kernel load_kern(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require_io(is.is_open(), "cannot open: " + path);
    read_header(is, path);
    return read_kernel_body(is, path);
}

void save_kern_batch(const std::vector<Kernel>& ks, const std::string& path) {
    AtomicFile f(path);
    f.stream().write(kMagic, 4);
    put_u16(f.stream(), kVersion);
    put_u32(f.stream(), (std::uint32_t)ks.size());
    for (const Kernel& k : ks) {
        put_u32(f.stream(), (std::uint32_t)k.h);
        put_u32(f.stream(), (std::uint32_t)k.w);
        put_f32(f.stream(), k.v.data(), k.v.size());
    }
    f.commit();
}

std::vector<Kernel> load_kern_batch(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require_io(is.is_open(), "cannot open: " + path);
    read_header(is, path);
    const std::uint32_t n = get_u32(is);
    std::vector<Kernel> ks;
    ks.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) ks.push_back(read_kernel_body(is, path));
    return ks;
}

} // namespace glkm

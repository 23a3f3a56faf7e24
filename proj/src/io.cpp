#include "eelm/io.hpp"

#include "eelm/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace eelm::io {

namespace fs = std::filesystem;

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomic(const fs::path& path, const std::string& bytes)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out)
            throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::uint64_t to_little_endian(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i)
            r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return v;
}

} // namespace

std::string encode(const Container& c, std::span<const std::string> order)
{
    std::string out;
    auto line = [&](const std::string& k) {
        auto it = c.header.find(k);
        if (it != c.header.end())
            out += k + "=" + it->second + "\n";
    };
    for (const auto& k : order)
        line(k);
    for (const auto& [k, v] : c.header)
        if (std::find(order.begin(), order.end(), k) == order.end())
            line(k);
    out += "\n";

    const std::size_t start = out.size();
    out.resize(start + 8 * c.payload.size());
    for (std::size_t i = 0; i < c.payload.size(); ++i) {
        const auto bits = to_little_endian(std::bit_cast<std::uint64_t>(c.payload[i]));
        std::memcpy(out.data() + start + 8 * i, &bits, 8);
    }
    return out;
}

Container decode(const std::string& bytes, const std::string& expected_magic)
{
    Container c;
    std::size_t pos = 0;
    while (true) {
        const auto eol = bytes.find('\n', pos);
        if (eol == std::string::npos)
            throw IoError("container: header is not terminated by a blank line");
        const std::string line = bytes.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty())
            break;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("container: malformed header line '" + line + "'");
        c.header[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (c.header["magic"] != expected_magic)
        throw IoError("container: expected magic '" + expected_magic + "', got '" + c.header["magic"] + "'");
    if (c.header["version"] != std::to_string(kFormatVersion))
        throw IoError("container: unsupported version '" + c.header["version"] + "'");

    const std::size_t n = (bytes.size() - pos) / 8;
    if ((bytes.size() - pos) % 8 != 0)
        throw IoError("container: payload is not a whole number of float64 values");
    c.payload.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, bytes.data() + pos + 8 * i, 8);
        c.payload[i] = std::bit_cast<double>(to_little_endian(bits));
    }
    return c;
}

namespace {

const std::string& need(const Container& c, const std::string& key)
{
    auto it = c.header.find(key);
    if (it == c.header.end())
        throw IoError("container: missing header key '" + key + "'");
    return it->second;
}

double need_double(const Container& c, const std::string& key)
{
    const auto& s = need(c, key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw IoError("container: '" + key + "' is not a number");
    return v;
}

std::size_t need_size(const Container& c, const std::string& key)
{
    const auto& s = need(c, key);
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size())
            throw IoError("");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw IoError("container: '" + key + "' is not a non-negative integer");
    }
}

Grid read_grid(const Container& c)
{
    try {
        return make_grid(need_double(c, "L"), need_size(c, "m"), static_cast<int>(need_size(c, "dims")));
    } catch (const ConfigError& e) {
        throw IoError(std::string("container: invalid grid: ") + e.what());
    }
}

} // namespace

void write_trajectory(const fs::path& path, const Trajectory& traj)
{
    Container c;
    c.header = {{"magic", kTrajectoryMagic},
                {"version", std::to_string(kFormatVersion)},
                {"dims", std::to_string(traj.grid.dims)},
                {"m", std::to_string(traj.grid.m)},
                {"L", format_double(traj.grid.L)},
                {"dt_snapshot", format_double(traj.dt_snapshot)},
                {"count", std::to_string(traj.states.size())}};
    c.payload.reserve(traj.states.size() * traj.grid.size());
    for (const auto& f : traj.states)
        c.payload.insert(c.payload.end(), f.values.begin(), f.values.end());
    static const std::vector<std::string> order = {"magic", "version", "dims", "m", "L", "dt_snapshot", "count"};
    write_atomic(path, encode(c, order));
}

Trajectory read_trajectory(const fs::path& path)
{
    const auto c = decode(read_file(path), kTrajectoryMagic);
    Trajectory traj;
    traj.grid = read_grid(c);
    traj.dt_snapshot = need_double(c, "dt_snapshot");
    const std::size_t count = need_size(c, "count");
    const std::size_t n = traj.grid.size();
    if (c.payload.size() != count * n)
        throw IoError("trajectory: payload size does not match count * m^dims");
    for (std::size_t t = 0; t < count; ++t) {
        const auto first = c.payload.begin() + static_cast<std::ptrdiff_t>(t * n);
        traj.states.emplace_back(traj.grid, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
    }
    return traj;
}

void write_model(const fs::path& path, const Surrogate& s, const ModelInfo& info)
{
    validate(s);
    const auto& p = s.elm.params;
    const auto& theta = s.elm.readout.theta;
    Container c;
    c.header = {{"magic", kModelMagic},
                {"version", std::to_string(kFormatVersion)},
                {"dims", std::to_string(info.grid.dims)},
                {"m", std::to_string(info.grid.m)},
                {"L", format_double(info.grid.L)},
                {"dt_snapshot", format_double(info.dt)},
                {"extent", std::to_string(s.geom.extent)},
                {"stride", std::to_string(s.geom.stride)},
                {"pe_order", std::to_string(s.geom.pe_order)},
                {"l_in", std::to_string(p.l_in())},
                {"l_hid", std::to_string(p.l_hid())},
                {"l_out", std::to_string(s.elm.l_out())},
                {"seed", std::to_string(p.seed)},
                {"v_min", format_double(s.normalizer.v_min())},
                {"v_max", format_double(s.normalizer.v_max())},
                {"zero_mean_wrap", s.zero_mean_wrap ? "1" : "0"},
                {"symmetry", s.symmetry.to_string()},
                {"symmetry_train", s.symmetry.use_for_training() ? "1" : "0"},
                {"symmetry_predict", s.symmetry.use_for_prediction() ? "1" : "0"}};
    for (Eigen::Index i = 0; i < p.W.rows(); ++i)
        for (Eigen::Index j = 0; j < p.W.cols(); ++j)
            c.payload.push_back(p.W(i, j));
    for (Eigen::Index i = 0; i < p.b.size(); ++i)
        c.payload.push_back(p.b(i));
    for (Eigen::Index i = 0; i < theta.rows(); ++i)
        for (Eigen::Index j = 0; j < theta.cols(); ++j)
            c.payload.push_back(theta(i, j));
    c.header["count"] = std::to_string(c.payload.size());
    static const std::vector<std::string> order = {"magic", "version", "dims", "m", "L", "dt_snapshot", "count"};
    write_atomic(path, encode(c, order));
}

Surrogate read_model(const fs::path& path, ModelInfo* info)
{
    const auto c = decode(read_file(path), kModelMagic);
    Surrogate s;
    const Grid grid = read_grid(c);
    if (info)
        *info = ModelInfo{grid, need_double(c, "dt_snapshot")};
    try {
        s.geom = make_geometry(grid.dims, need_size(c, "extent"), need_size(c, "stride"), need_size(c, "pe_order"));
        s.normalizer = Normalizer(need_double(c, "v_min"), need_double(c, "v_max"));
        s.symmetry = SymmetryConfig::parse(need(c, "symmetry"), need(c, "symmetry_train") == "1",
                                           need(c, "symmetry_predict") == "1");
    } catch (const ConfigError& e) {
        throw IoError(std::string("model: invalid header: ") + e.what());
    }
    s.zero_mean_wrap = need(c, "zero_mean_wrap") == "1";

    const auto l_in = static_cast<Eigen::Index>(need_size(c, "l_in"));
    const auto l_hid = static_cast<Eigen::Index>(need_size(c, "l_hid"));
    const auto l_out = static_cast<Eigen::Index>(need_size(c, "l_out"));
    const auto expected = static_cast<std::size_t>(l_hid * l_in + l_hid + l_out * l_hid);
    if (c.payload.size() != expected || need_size(c, "count") != expected)
        throw IoError("model: payload size does not match dimensions");

    auto& p = s.elm.params;
    p.seed = need_size(c, "seed");
    p.W.resize(l_hid, l_in);
    p.b.resize(l_hid);
    s.elm.readout.theta.resize(l_out, l_hid);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < l_hid; ++i)
        for (Eigen::Index j = 0; j < l_in; ++j)
            p.W(i, j) = c.payload[k++];
    for (Eigen::Index i = 0; i < l_hid; ++i)
        p.b(i) = c.payload[k++];
    for (Eigen::Index i = 0; i < l_out; ++i)
        for (Eigen::Index j = 0; j < l_hid; ++j)
            s.elm.readout.theta(i, j) = c.payload[k++];
    try {
        validate(s);
    } catch (const ConfigError& e) {
        throw IoError(std::string("model: inconsistent dimensions: ") + e.what());
    }
    return s;
}

void write_rse_csv(const fs::path& path, double dt_snapshot, std::span<const double> rse)
{
    std::string out = "t,rse_percent\n";
    for (std::size_t t = 0; t < rse.size(); ++t)
        out += format_double(static_cast<double>(t) * dt_snapshot) + "," + format_double(rse[t]) + "\n";
    write_atomic(path, out);
}

void write_moments_csv(const fs::path& path, const Grid& grid, const std::vector<std::vector<double>>& moments)
{
    std::string out = "x";
    for (std::size_t k = 0; k < moments.size(); ++k)
        out += ",m" + std::to_string(k + 1);
    out += "\n";
    for (std::size_t x = 0; x < grid.size(); ++x) {
        out += grid.dims == 1 ? format_double(static_cast<double>(x) * grid.dx()) : std::to_string(x);
        for (const auto& m : moments)
            out += "," + format_double(m[x]);
        out += "\n";
    }
    write_atomic(path, out);
}

void write_pgm(const fs::path& path, std::size_t width, std::size_t height, std::span<const double> values,
               double lo, double hi)
{
    if (values.size() != width * height)
        throw IoError("pgm: value count does not match width * height");
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    const double range = hi > lo ? hi - lo : 1.0;
    for (double v : values) {
        const double t = std::clamp((v - lo) / range, 0.0, 1.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
    }
    write_atomic(path, out);
}

std::uint64_t checksum(const fs::path& path)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : read_file(path)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace eelm::io

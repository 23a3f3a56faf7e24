#include "eelm/symmetry.hpp"

#include "eelm/errors.hpp"

#include <algorithm>

namespace eelm {

namespace {

// act(g, w)[p] = w[A_g p] on centered coordinates p = (2i - (d-1), 2j - (d-1)).
using Mat = std::array<int, 4>;  // row-major 2x2

constexpr std::array<Mat, 8> kMatrices = {{
    {1, 0, 0, 1},    // R0
    {0, 1, -1, 0},   // R90
    {-1, 0, 0, -1},  // R180
    {0, -1, 1, 0},   // R270
    {1, 0, 0, -1},   // FH
    {-1, 0, 0, 1},   // FV
    {0, 1, 1, 0},    // FD
    {0, -1, -1, 0},  // FA
}};

const Mat& matrix(Symmetry g) { return kMatrices[static_cast<std::size_t>(g)]; }

Mat multiply(const Mat& a, const Mat& b)
{
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Symmetry from_matrix(const Mat& a)
{
    for (Symmetry g : kAllSymmetries)
        if (matrix(g) == a)
            return g;
    throw ConfigError("symmetry: matrix is not a square symmetry");
}

} // namespace

Symmetry compose(Symmetry g, Symmetry h)
{
    // act(g, act(h, w))[p] = act(h, w)[A_g p] = w[A_h A_g p]
    return from_matrix(multiply(matrix(h), matrix(g)));
}

Symmetry inverse(Symmetry g)
{
    const Mat& a = matrix(g);
    return from_matrix({a[0], a[2], a[1], a[3]});
}

std::string_view token(Symmetry g)
{
    static constexpr std::array<std::string_view, 8> names = {"e", "r90", "r180", "r270", "fh", "fv", "fd", "fa"};
    return names[static_cast<std::size_t>(g)];
}

Symmetry parse_symmetry(std::string_view tok)
{
    for (Symmetry g : kAllSymmetries)
        if (token(g) == tok)
            return g;
    throw ConfigError("symmetry: unknown element '" + std::string(tok) + "'");
}

std::vector<std::size_t> permutation(Symmetry g, std::size_t side, int dims)
{
    if (dims == 1) {
        if (g != Symmetry::R0 && g != Symmetry::FH)
            throw ConfigError("symmetry: only e and fh act on 1D windows");
        std::vector<std::size_t> perm(side);
        for (std::size_t k = 0; k < side; ++k)
            perm[k] = g == Symmetry::R0 ? k : side - 1 - k;
        return perm;
    }
    const Mat& a = matrix(g);
    const auto d = static_cast<long>(side);
    std::vector<std::size_t> perm(side * side);
    for (long i = 0; i < d; ++i) {
        for (long j = 0; j < d; ++j) {
            const long pi = 2 * i - (d - 1);
            const long pj = 2 * j - (d - 1);
            const long si = a[0] * pi + a[1] * pj;
            const long sj = a[2] * pi + a[3] * pj;
            perm[static_cast<std::size_t>(i * d + j)] =
                static_cast<std::size_t>(((si + d - 1) / 2) * d + (sj + d - 1) / 2);
        }
    }
    return perm;
}

namespace detail {

std::size_t window_side(std::size_t len, int dims)
{
    if (dims == 1)
        return len;
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(len))));
    if (side * side != len)
        throw ConfigError("symmetry: 2D window is not square");
    return side;
}

void require_no_encoding(std::size_t pe_len)
{
    if (pe_len != 0)
        throw ConfigError("symmetry: cannot be combined with positional encoding");
}

} // namespace detail

std::vector<double> act(Symmetry g, std::span<const double> w, int dims)
{
    const auto perm = permutation(g, detail::window_side(w.size(), dims), dims);
    std::vector<double> out(w.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = w[perm[k]];
    return out;
}

SymmetryConfig::SymmetryConfig() : subgroup_{Symmetry::R0} {}

SymmetryConfig::SymmetryConfig(std::vector<Symmetry> subgroup, bool use_for_training, bool use_for_prediction)
    : train_(use_for_training), predict_(use_for_prediction)
{
    for (Symmetry g : kAllSymmetries)
        if (std::find(subgroup.begin(), subgroup.end(), g) != subgroup.end())
            subgroup_.push_back(g);
    auto contains = [&](Symmetry g) { return std::find(subgroup_.begin(), subgroup_.end(), g) != subgroup_.end(); };
    if (!contains(Symmetry::R0))
        throw ConfigError("symmetry.subgroup must contain the identity 'e'");
    for (Symmetry g : subgroup_) {
        if (!contains(inverse(g)))
            throw ConfigError("symmetry.subgroup is not closed under inverse");
        for (Symmetry h : subgroup_)
            if (!contains(compose(g, h)))
                throw ConfigError("symmetry.subgroup is not closed under composition");
    }
}

SymmetryConfig SymmetryConfig::full(bool use_for_training, bool use_for_prediction)
{
    return SymmetryConfig({kAllSymmetries.begin(), kAllSymmetries.end()}, use_for_training, use_for_prediction);
}

SymmetryConfig SymmetryConfig::parse(std::string_view tokens, bool use_for_training, bool use_for_prediction)
{
    std::vector<Symmetry> elems;
    while (!tokens.empty()) {
        const auto comma = tokens.find(',');
        auto tok = tokens.substr(0, comma);
        while (!tok.empty() && tok.front() == ' ')
            tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ')
            tok.remove_suffix(1);
        if (tok == "all") {
            elems.assign(kAllSymmetries.begin(), kAllSymmetries.end());
        } else if (!tok.empty()) {
            elems.push_back(parse_symmetry(tok));
        }
        if (comma == std::string_view::npos)
            break;
        tokens.remove_prefix(comma + 1);
    }
    if (elems.empty())
        elems.push_back(Symmetry::R0);
    return SymmetryConfig(std::move(elems), use_for_training, use_for_prediction);
}

std::string SymmetryConfig::to_string() const
{
    std::string out;
    for (Symmetry g : subgroup_) {
        if (!out.empty())
            out += ',';
        out += token(g);
    }
    return out;
}

std::vector<WindowPair> augment(std::span<const WindowPair> pairs, const SymmetryConfig& cfg, int dims,
                                std::size_t pe_len)
{
    detail::require_no_encoding(pe_len);
    std::vector<WindowPair> out;
    out.reserve(pairs.size() * cfg.subgroup().size());
    for (const auto& [z, zp] : pairs)
        for (Symmetry g : cfg.subgroup())
            out.emplace_back(act(g, z, dims), act(g, zp, dims));
    return out;
}

std::vector<double> equivariant_predict(const ElmModel& model, std::span<const double> z, const SymmetryConfig& cfg,
                                        int dims, std::size_t pe_len)
{
    return equivariant_predict([&](std::span<const double> w) { return model.predict(w); }, z, cfg, dims, pe_len);
}

} // namespace eelm

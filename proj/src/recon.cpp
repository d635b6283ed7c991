#include "diqr/recon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

namespace diqr {

namespace {

bool parity(std::uint64_t v) { return std::popcount(v) & 1; }

// Reduced row echelon basis of the null space of the given rows (n columns).
std::vector<std::uint32_t> null_space(std::vector<std::uint32_t> rows, int n) {
    std::vector<int> pivots;
    std::size_t rank = 0;
    for (int c = 0; c < n && rank < rows.size(); ++c) {
        const std::uint32_t bit = 1u << c;
        auto it = std::find_if(rows.begin() + static_cast<long>(rank), rows.end(),
                               [&](std::uint32_t r) { return r & bit; });
        if (it == rows.end()) continue;
        std::iter_swap(rows.begin() + static_cast<long>(rank), it);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != rank && (rows[i] & bit)) rows[i] ^= rows[rank];
        pivots.push_back(c);
        ++rank;
    }
    std::vector<std::uint32_t> basis;
    std::uint32_t pivot_mask = 0;
    for (int p : pivots) pivot_mask |= 1u << p;
    for (int f = 0; f < n; ++f) {
        if (pivot_mask & (1u << f)) continue;
        std::uint32_t v = 1u << f;
        for (std::size_t i = 0; i < pivots.size(); ++i)
            if (rows[i] & (1u << f)) v |= 1u << pivots[i];
        basis.push_back(v);
    }
    return basis;
}

std::uint32_t pack32(const Bits& w, std::size_t off, int len) {
    std::uint32_t v = 0;
    for (int j = 0; j < len; ++j)
        if (w[off + static_cast<std::size_t>(j)]) v |= 1u << j;
    return v;
}

std::uint64_t pack64(const Bits& w) {
    if (w.size() > 64) throw std::invalid_argument("hash input longer than 64 bits");
    std::uint64_t v = 0;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j]) v |= std::uint64_t{1} << j;
    return v;
}

int poly_degree(std::uint64_t p) { return static_cast<int>(std::bit_width(p)) - 1; }

std::uint64_t poly_mod(std::uint64_t a, std::uint64_t f) {
    const int df = poly_degree(f);
    for (int d = poly_degree(a); d >= df; d = poly_degree(a)) a ^= f << (d - df);
    return a;
}

std::uint64_t poly_gcd(std::uint64_t a, std::uint64_t b) {
    while (b) {
        a = poly_mod(a, b);
        std::swap(a, b);
    }
    return a;
}

// a * b mod f for deg a, deg b < deg f <= 63.
std::uint64_t poly_mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t f) {
    const int m = poly_degree(f);
    const std::uint64_t top = std::uint64_t{1} << m;
    std::uint64_t acc = 0;
    while (b) {
        if (b & 1) acc ^= a;
        b >>= 1;
        a <<= 1;
        if (a & top) a ^= f;
    }
    return acc;
}

}  // namespace

std::uint32_t SmallCode::syndrome(std::uint32_t word) const {
    std::uint32_t s = 0;
    for (std::size_t i = 0; i < checks.size(); ++i)
        if (parity(checks[i] & word)) s |= 1u << i;
    return s;
}

int SmallCode::min_distance() const {
    const auto basis = null_space(checks, n);
    if (basis.empty()) return n + 1;
    int best = n + 1;
    const std::uint64_t count = std::uint64_t{1} << basis.size();
    std::uint32_t word = 0;
    // Gray-code walk over all nonzero codewords.
    for (std::uint64_t i = 1; i < count; ++i) {
        word ^= basis[static_cast<std::size_t>(std::countr_zero(i))];
        best = std::min(best, std::popcount(word));
    }
    return best;
}

SmallCode cyclic_code(int n, std::uint32_t generator) {
    const int deg = poly_degree(generator);
    if (n > 24 || deg <= 0 || deg >= n) throw std::invalid_argument("cyclic_code: bad generator");
    std::vector<std::uint32_t> gen_rows;
    for (int s = 0; s + deg < n; ++s) gen_rows.push_back(generator << s);
    return SmallCode{n, null_space(gen_rows, n)};
}

SmallCode bch_15_5() { return cyclic_code(15, 0b10100110111); }
SmallCode bch_15_7() { return cyclic_code(15, 0b111010001); }
SmallCode hamming_7_4() { return cyclic_code(7, 0b1011); }

SmallCode random_check_code(std::mt19937_64& rng, int n, int r) {
    if (n > 24 || r > 24) throw std::invalid_argument("random_check_code: n, r <= 24");
    SmallCode c{n, {}};
    for (int i = 0; i < r; ++i) c.checks.push_back(static_cast<std::uint32_t>(rng()) & ((1u << n) - 1));
    return c;
}

LinearCode::LinearCode(SmallCode block, std::size_t N, Regime regime, int radius, int list_cap)
    : block_(std::move(block)), N_(N), regime_(regime), radius_(radius), list_cap_(list_cap) {
    if (block_.n <= 0 || block_.n > 24 || block_.r() > 24) throw std::invalid_argument("LinearCode: block n, r <= 24");
    if (N == 0 || radius < 0) throw std::invalid_argument("LinearCode: bad N or radius");
    const auto n = static_cast<std::size_t>(block_.n);
    blocks_ = (N + n - 1) / n;
    last_used_ = static_cast<int>(N - (blocks_ - 1) * n);
    if (regime == Regime::list) {
        if (blocks_ != 1) throw std::invalid_argument("LinearCode: list regime needs a single block");
        if (list_cap <= 0) throw std::invalid_argument("LinearCode: list cap must be positive");
    } else if (2 * radius >= block_.min_distance()) {
        throw std::invalid_argument("LinearCode: minimum distance must exceed twice the radius");
    }
    full_ = build_table(block_.n);
    if (last_used_ != block_.n) last_ = build_table(last_used_);
}

LinearCode::Table LinearCode::build_table(int used) const {
    Table t;
    const int wmax = std::min(radius_, used);
    for (int w = 0; w <= wmax; ++w) {
        if (w == 0) {
            t[0].push_back(0);
            continue;
        }
        // Gosper's hack over the used coordinates, weight by weight.
        std::uint32_t v = (1u << w) - 1;
        const std::uint32_t limit = 1u << used;
        while (v < limit) {
            auto& bucket = t[block_.syndrome(v)];
            if (regime_ == Regime::list || bucket.empty()) bucket.push_back(v);
            const std::uint32_t c = v & (~v + 1);
            const std::uint32_t r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    }
    return t;
}

LinearCode LinearCode::load(const std::string& path, Regime regime, int radius, int list_cap) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open code file " + path);
    SmallCode c;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (c.n == 0) c.n = static_cast<int>(line.size());
        if (static_cast<int>(line.size()) != c.n || c.n > 24) throw std::runtime_error("code file: ragged or too wide row");
        std::uint32_t row = 0;
        for (int j = 0; j < c.n; ++j) {
            if (line[static_cast<std::size_t>(j)] == '1') row |= 1u << j;
            else if (line[static_cast<std::size_t>(j)] != '0') throw std::runtime_error("code file: bad character");
        }
        c.checks.push_back(row);
    }
    if (c.checks.empty()) throw std::runtime_error("code file: no rows");
    return LinearCode(c, static_cast<std::size_t>(c.n), regime, radius, list_cap);
}

std::vector<Bits> LinearCode::check_matrix() const {
    std::vector<Bits> rows;
    const auto n = static_cast<std::size_t>(block_.n);
    for (std::size_t b = 0; b < blocks_; ++b)
        for (std::uint32_t chk : block_.checks) {
            Bits row(N_, 0);
            for (std::size_t j = 0; j < n && b * n + j < N_; ++j) row[b * n + j] = (chk >> j) & 1;
            rows.push_back(std::move(row));
        }
    return rows;
}

Bits LinearCode::syndrome(const Bits& word) const {
    if (word.size() != N_) throw std::invalid_argument("syndrome: word length must equal N");
    const auto n = static_cast<std::size_t>(block_.n);
    const auto r = static_cast<std::size_t>(block_.r());
    Bits s(syndrome_len(), 0);
    for (std::size_t b = 0; b < blocks_; ++b) {
        const int len = (b + 1 == blocks_) ? last_used_ : block_.n;
        const std::uint32_t syn = block_.syndrome(pack32(word, b * n, len));
        for (std::size_t i = 0; i < r; ++i) s[b * r + i] = (syn >> i) & 1;
    }
    return s;
}

std::uint32_t LinearCode::block_syndrome(const Bits& s, std::size_t b) const {
    return pack32(s, b * static_cast<std::size_t>(block_.r()), block_.r());
}

Bits LinearCode::unique_decode(const Bits& syndrome) const {
    if (regime_ != Regime::unique) throw std::logic_error("unique_decode: code is in the list regime");
    if (syndrome.size() != syndrome_len()) throw std::invalid_argument("unique_decode: syndrome length");
    const auto n = static_cast<std::size_t>(block_.n);
    Bits e(N_, 0);
    for (std::size_t b = 0; b < blocks_; ++b) {
        const auto& table = table_for(b);
        auto it = table.find(block_syndrome(syndrome, b));
        if (it == table.end())
            throw DecodeFailure("no error of weight <= " + std::to_string(radius_) + " in block " + std::to_string(b));
        const std::uint32_t v = it->second.front();
        for (std::size_t j = 0; j < n && b * n + j < N_; ++j) e[b * n + j] = (v >> j) & 1;
    }
    return e;
}

std::vector<Bits> LinearCode::list_decode(const Bits& syndrome, int radius) const {
    if (regime_ != Regime::list) throw std::logic_error("list_decode: code is in the unique regime");
    if (syndrome.size() != syndrome_len()) throw std::invalid_argument("list_decode: syndrome length");
    if (radius > radius_) throw std::invalid_argument("list_decode: radius beyond the table");
    std::vector<Bits> out;
    auto it = full_.find(block_syndrome(syndrome, 0));
    if (it == full_.end()) return out;
    for (std::uint32_t v : it->second) {
        if (std::popcount(v) > radius) continue;
        Bits e(N_, 0);
        for (std::size_t j = 0; j < N_; ++j) e[j] = (v >> j) & 1;
        out.push_back(std::move(e));
    }
    if (static_cast<int>(out.size()) > list_cap_)
        throw ListOverflow("list of " + std::to_string(out.size()) + " exceeds cap " + std::to_string(list_cap_));
    return out;
}

std::size_t LinearCode::max_list_size() const {
    std::size_t m = 0;
    for (const auto& [s, v] : full_) m = std::max(m, v.size());
    return m;
}

LinearCode desk_list_code(int list_cap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (;;) {
        SmallCode c = random_check_code(rng, 20, 14);
        if (null_space(c.checks, c.n).size() != 6) continue;
        LinearCode code(c, 20, Regime::list, 8, list_cap);
        if (code.max_list_size() <= static_cast<std::size_t>(list_cap)) return code;
    }
}

bool irreducible(std::uint64_t f) {
    const int m = poly_degree(f);
    if (m < 1 || m > 63) return false;
    if (m == 1) return true;
    std::uint64_t u = 2;  // x
    for (int i = 1; i <= m / 2; ++i) {
        u = poly_mulmod(u, u, f);
        if (poly_gcd(f, u ^ 2) != 1) return false;
    }
    return true;
}

Gf2m Gf2m::make(int m) {
    if (m < 1 || m > 63) throw std::invalid_argument("Gf2m: 1 <= m <= 63");
    const std::uint64_t top = std::uint64_t{1} << m;
    for (std::uint64_t low = 1; low < top; low += 2)
        if (irreducible(top | low)) return Gf2m{m, top | low};
    throw std::logic_error("no irreducible polynomial found");
}

std::uint64_t Gf2m::mul(std::uint64_t a, std::uint64_t b) const { return poly_mulmod(a, b, modulus); }

AlmostPairwiseHash AlmostPairwiseHash::affine(int N, int k) {
    if (N < 1 || k < 1 || N > 63 || k > 63) throw std::invalid_argument("affine hash: 1 <= N, k <= 63");
    return AlmostPairwiseHash{HashKind::affine, N, k, Gf2m::make(std::max(N, k)), 0.0};
}

AlmostPairwiseHash AlmostPairwiseHash::eps_biased(int N, int k, int m) {
    if (N < 1 || k < 1 || N > 63 || k > 63) throw std::invalid_argument("eps-biased hash: 1 <= N, k <= 63");
    const double M = static_cast<double>(k) * (N + 1);
    return AlmostPairwiseHash{HashKind::eps_biased, N, k, Gf2m::make(m), std::min(1.0, (M - 1) / std::ldexp(1.0, m))};
}

std::uint64_t AlmostPairwiseHash::Prepared::apply(std::uint64_t x) const {
    std::uint64_t out = constant;
    for (std::size_t j = 0; j < masks.size(); ++j)
        if (parity(masks[j] & x)) out ^= std::uint64_t{1} << j;
    return out;
}

AlmostPairwiseHash::Prepared AlmostPairwiseHash::prepare(const Bits& seed) const {
    if (seed.size() != seed_len()) throw std::invalid_argument("hash seed length mismatch");
    const auto m = static_cast<std::size_t>(field.m);
    const std::uint64_t a = pack64(Bits(seed.begin(), seed.begin() + static_cast<long>(m)));
    const std::uint64_t b = pack64(Bits(seed.begin() + static_cast<long>(m), seed.end()));
    Prepared p;
    p.masks.assign(static_cast<std::size_t>(k), 0);
    if (kind == HashKind::affine) {
        // a * x = sum_i x_i (a alpha^i); output bit j is bit j of the field element.
        std::uint64_t col = a;
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < k; ++j)
                if ((col >> j) & 1) p.masks[static_cast<std::size_t>(j)] |= std::uint64_t{1} << i;
            col = field.mul(col, 2);
        }
        p.constant = b & ((k == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << k) - 1));
    } else {
        // r_t = <x^t, y> with x = a, y = b; output j uses r_{j(N+1)} .. r_{j(N+1)+N}.
        std::uint64_t power = 1;
        for (int j = 0; j < k; ++j) {
            for (int i = 0; i <= N; ++i) {
                if (parity(power & b)) {
                    if (i < N) p.masks[static_cast<std::size_t>(j)] |= std::uint64_t{1} << i;
                    else p.constant |= std::uint64_t{1} << j;
                }
                power = field.mul(power, a);
            }
        }
    }
    return p;
}

Bits hash_draw_eval(const AlmostPairwiseHash& family, const Bits& seed, const Bits& x) {
    if (x.size() != static_cast<std::size_t>(family.N)) throw std::invalid_argument("hash input length mismatch");
    const std::uint64_t h = family.prepare(seed).apply(pack64(x));
    Bits out(static_cast<std::size_t>(family.k));
    for (int j = 0; j < family.k; ++j) out[static_cast<std::size_t>(j)] = (h >> j) & 1;
    return out;
}

int hash_output_bits(int list_cap, double epsilon) {
    if (list_cap < 1 || !(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("hash_output_bits: L >= 1, 0 < eps < 1");
    return static_cast<int>(std::ceil(std::log2(2.0 * list_cap / epsilon) - 1e-12));
}

int eps_biased_field_bits(int N, int k, int list_cap, double epsilon) {
    const double slack = epsilon - list_cap / std::ldexp(1.0, k);
    if (!(slack > 0)) throw std::invalid_argument("eps_biased_field_bits: no slack left for eps_h");
    const double M = static_cast<double>(k) * (N + 1);
    const int m = static_cast<int>(std::ceil(std::log2((M - 1) / (2 * slack)) - 1e-12));
    if (m > 63) throw std::invalid_argument("eps_biased_field_bits: field too large");
    return std::max(m, 1);
}

EirResult eir_run(const LinearCode& code, const Bits& X, const Bits& Y, double lambda, BitSource& shared,
                  const AlmostPairwiseHash* hash) {
    const std::size_t N = code.N();
    if (X.size() != N || Y.size() != N) throw std::invalid_argument("eir_run: X and Y must have length N");
    if (!(lambda > 0 && lambda < 0.5)) throw std::invalid_argument("eir_run: lambda in (0, 1/2)");
    EirResult res;
    std::size_t dist = 0;
    for (std::size_t i = 0; i < N; ++i) dist += (X[i] != Y[i]);
    const auto bound = static_cast<std::size_t>(std::floor((0.5 - lambda) * static_cast<double>(N) + 1e-9));
    res.promise_violated = dist > bound;

    const Bits sx = code.syndrome(X);
    Bits s = code.syndrome(Y);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] ^= sx[i];
    res.leaked_bits = sx.size();

    auto finish = [&](const Bits& delta) {
        res.bob_estimate = Y;
        for (std::size_t i = 0; i < N; ++i) {
            res.bob_estimate[i] ^= delta[i];
            res.corrections += delta[i];
        }
        res.correct = res.bob_estimate == X;
    };

    if (code.regime() == Regime::unique) {
        try {
            finish(code.unique_decode(s));
        } catch (const DecodeFailure& e) {
            res.aborted = true;
            res.abort_reason = std::string("decode failure: ") + e.what();
        }
        return res;
    }

    if (!hash || hash->N != static_cast<int>(N)) throw std::invalid_argument("eir_run: list regime needs a hash over N bits");
    res.leaked_bits += static_cast<std::size_t>(hash->k);
    std::vector<Bits> candidates;
    try {
        candidates = code.list_decode(s, static_cast<int>(bound));
    } catch (const ListOverflow& e) {
        res.aborted = true;
        res.abort_reason = std::string("list overflow: ") + e.what();
        return res;
    }
    Bits seed(hash->seed_len());
    for (auto& b : seed) b = shared.next_bit();
    res.randomness_used = seed.size();
    const auto prepared = hash->prepare(seed);
    const std::uint64_t hx = prepared.apply(pack64(X));
    const Bits* match = nullptr;
    std::size_t matches = 0;
    for (const auto& d : candidates) {
        Bits guess = Y;
        for (std::size_t i = 0; i < N; ++i) guess[i] ^= d[i];
        if (prepared.apply(pack64(guess)) == hx) {
            ++matches;
            match = &d;
        }
    }
    if (matches != 1) {
        res.aborted = true;
        res.abort_reason = matches == 0 ? "no list candidate matches the hash" : "hash does not single out a candidate";
        return res;
    }
    finish(*match);
    return res;
}

}  // namespace diqr

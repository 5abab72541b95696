#pragma once

// Watermark integer <-> self-inverting permutation codec.
//
// A watermark number w with binary digits b1..bn (b1 = 1) is stretched into
// the flagged bitstring B* = 0^n b1..bn 1 of length 2n+1.  The ascending
// positions of the 1-bits followed by the descending positions of the 0-bits
// form a bitonic sequence; pairing its k-th element with its (2n+2-k)-th
// element yields the 2-cycles of an involution with exactly one fixed point.
// That involution is the self-inverting permutation carrying w.

#include <cstdint>
#include <string>
#include <vector>

#include "waterrpg/error.hpp"

namespace waterrpg {

/// A permutation of 1..m stored one-based: perm[i-1] is the image of i.
using Permutation = std::vector<int>;

inline int bit_length(std::uint64_t w) {
    int n = 0;
    while (w != 0) {
        ++n;
        w >>= 1;
    }
    return n;
}

/// True iff p is a permutation of 1..p.size().
inline bool is_permutation_of_1n(const Permutation& p) {
    std::vector<bool> seen(p.size(), false);
    for (int v : p) {
        if (v < 1 || v > static_cast<int>(p.size()) || seen[v - 1]) return false;
        seen[v - 1] = true;
    }
    return true;
}

/// True iff p(p(i)) = i for all i.  Rejects non-permutations.
inline bool is_self_inverting(const Permutation& p) {
    if (!is_permutation_of_1n(p)) throw Error("is_self_inverting: input is not a permutation of 1..n");
    for (int i = 1; i <= static_cast<int>(p.size()); ++i) {
        if (p[p[i - 1] - 1] != i) return false;
    }
    return true;
}

/// Encode w >= 1 as a self-inverting permutation of length 2n+1,
/// n = bit_length(w).
inline Permutation encode_number_to_sip(std::uint64_t w) {
    if (w < 1) throw Error("encode_number_to_sip: watermark must be a positive integer");
    const int n = bit_length(w);
    const int len = 2 * n + 1;

    // B* = 0^n b1..bn 1, one-based positions 1..2n+1.
    std::vector<int> bits(len + 1, 0);
    for (int i = 1; i <= n; ++i) bits[n + i] = static_cast<int>((w >> (n - i)) & 1u);
    bits[len] = 1;

    std::vector<int> ones;   // ascending positions of 1-bits
    std::vector<int> zeros;  // ascending positions of 0-bits
    for (int i = 1; i <= len; ++i) (bits[i] ? ones : zeros).push_back(i);

    // Bitonic sequence: ones ascending, then zeros descending.
    std::vector<int> bitonic = ones;
    bitonic.insert(bitonic.end(), zeros.rbegin(), zeros.rend());

    Permutation p(len, 0);
    for (int k = 1; k <= n; ++k) {
        int a = bitonic[k - 1];
        int b = bitonic[2 * n + 2 - k - 1];
        p[a - 1] = b;
        p[b - 1] = a;
    }
    int fixed = bitonic[n];  // middle element stays fixed
    p[fixed - 1] = fixed;
    return p;
}

/// Decode a permutation produced by encode_number_to_sip back to w.
/// Rejects anything that is not an encoder image.
inline std::uint64_t decode_sip_to_number(const Permutation& p) {
    if (p.size() % 2 == 0 || p.empty()) throw Error("decode_sip_to_number: length must be odd");
    if (!is_self_inverting(p)) throw Error("decode_sip_to_number: permutation is not self-inverting");
    const int n = static_cast<int>(p.size() - 1) / 2;

    for (int k = 1; k <= n; ++k) {
        if (p[k - 1] <= n) throw Error("decode_sip_to_number: not an encoder image (small partner)");
    }
    // Maximal strictly ascending prefix of (p_1..p_n).
    std::vector<int> prefix;
    for (int k = 1; k <= n; ++k) {
        if (!prefix.empty() && p[k - 1] <= prefix.back()) break;
        prefix.push_back(p[k - 1]);
    }
    std::uint64_t w = 0;
    for (int i = 1; i <= n; ++i) {
        int bit = 0;
        for (int v : prefix) {
            if (v == n + i) bit = 1;
        }
        w = (w << 1) | static_cast<std::uint64_t>(bit);
        if (i == 1 && bit != 1) throw Error("decode_sip_to_number: not an encoder image (leading bit is 0)");
    }
    return w;
}

/// Text form "(3,5,1,4,2)".
inline std::string format_permutation(const Permutation& p) {
    std::string out = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(p[i]);
    }
    out += ')';
    return out;
}

inline Permutation parse_permutation(const std::string& text) {
    Permutation p;
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
    skip_ws();
    if (i >= text.size() || text[i] != '(') throw Error("parse_permutation: expected '('");
    ++i;
    skip_ws();
    while (i < text.size() && text[i] != ')') {
        std::size_t used = 0;
        int v;
        try {
            v = std::stoi(text.substr(i), &used);
        } catch (const std::exception&) {
            throw Error("parse_permutation: expected integer");
        }
        p.push_back(v);
        i += used;
        skip_ws();
        if (i < text.size() && text[i] == ',') {
            ++i;
            skip_ws();
        }
    }
    if (i >= text.size() || text[i] != ')') throw Error("parse_permutation: expected ')'");
    if (!is_permutation_of_1n(p)) throw Error("parse_permutation: not a permutation of 1..n");
    return p;
}

}  // namespace waterrpg

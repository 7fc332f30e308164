#include "corel/sequence.hpp"

#include <algorithm>

namespace corel {

namespace {
const std::string kSymbolPool =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
}

Alphabet::Alphabet(std::string symbols) : symbols_(std::move(symbols)) {
    if (symbols_.size() < 2)
        throw Error(Errc::invalid_input, "alphabet needs at least 2 symbols");
    for (size_t i = 0; i < symbols_.size(); ++i) {
        for (size_t j = i + 1; j < symbols_.size(); ++j)
            if (symbols_[i] == symbols_[j])
                throw Error(Errc::invalid_input,
                            std::string("duplicate alphabet symbol '") + symbols_[i] + "'");
        if (symbols_[i] == '-') gap_ = static_cast<int>(i);
    }
    for (int a = 0; a < size(); ++a)
        if (!gap_ || a != *gap_) mutation_tokens_.push_back(a);
}

Alphabet Alphabet::generated(int size, bool with_gap) {
    if (size < 2 || size > static_cast<int>(kSymbolPool.size()))
        throw Error(Errc::invalid_input, "generated alphabet size out of range");
    std::string s = kSymbolPool.substr(0, static_cast<size_t>(size));
    if (with_gap) s += '-';
    return Alphabet(s);
}

char Alphabet::symbol(int index) const {
    if (index < 0 || index >= size())
        throw Error(Errc::invalid_sequence, "token index out of range");
    return symbols_[static_cast<size_t>(index)];
}

int Alphabet::index_of(char symbol) const {
    auto pos = symbols_.find(symbol);
    if (pos == std::string::npos)
        throw Error(Errc::invalid_sequence,
                    std::string("token '") + symbol + "' not in alphabet");
    return static_cast<int>(pos);
}

int Alphabet::gap_index() const {
    if (!gap_) throw Error(Errc::invalid_input, "alphabet has no gap token");
    return *gap_;
}

void validate_sequence(const Sequence& x, const Alphabet& alphabet) {
    if (x.tokens.empty())
        throw Error(Errc::invalid_sequence, "sequence must be nonempty");
    for (int t : x.tokens)
        if (t < 0 || t >= alphabet.size())
            throw Error(Errc::invalid_sequence, "token index out of range");
}

std::string format_sequence(const Sequence& x, const Alphabet& alphabet) {
    std::string out;
    out.reserve(x.tokens.size());
    for (int t : x.tokens) out += alphabet.symbol(t);
    return out;
}

Sequence parse_sequence(const std::string& text, const Alphabet& alphabet) {
    Sequence x;
    x.tokens.reserve(text.size());
    for (char c : text) x.tokens.push_back(alphabet.index_of(c));
    if (x.tokens.empty())
        throw Error(Errc::invalid_sequence, "empty sequence");
    return x;
}

int hamming_distance(const Sequence& a, const Sequence& b) {
    if (a.length() != b.length())
        throw Error(Errc::dimension_mismatch, "hamming distance needs equal lengths");
    int d = 0;
    for (int l = 0; l < a.length(); ++l)
        if (a[l] != b[l]) ++d;
    return d;
}

} // namespace corel

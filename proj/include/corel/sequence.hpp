#ifndef COREL_SEQUENCE_HPP
#define COREL_SEQUENCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "corel/error.hpp"

namespace corel {

/// Ordered set of distinct single-character tokens. An optional gap token
/// (used for padding variable-length corpora) is excluded from mutation moves.
class Alphabet {
public:
    explicit Alphabet(std::string symbols);

    // first `size` letters of A-Z a-z 0-9, optionally followed by '-' as gap
    static Alphabet generated(int size, bool with_gap = false);

    int size() const { return static_cast<int>(symbols_.size()); }
    char symbol(int index) const;
    int index_of(char symbol) const;  // throws invalid_sequence on unknown token

    bool has_gap() const { return gap_.has_value(); }
    int gap_index() const;

    /// Token indices legal as mutation targets (everything but the gap).
    const std::vector<int>& mutation_tokens() const { return mutation_tokens_; }

    const std::string& symbols() const { return symbols_; }
    bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }

private:
    std::string symbols_;
    std::optional<int> gap_;
    std::vector<int> mutation_tokens_;
};

/// Fixed-length token-index sequence over some alphabet.
struct Sequence {
    std::vector<int> tokens;

    Sequence() = default;
    explicit Sequence(std::vector<int> t) : tokens(std::move(t)) {}

    int length() const { return static_cast<int>(tokens.size()); }
    int operator[](int i) const { return tokens[i]; }
    bool operator==(const Sequence& other) const { return tokens == other.tokens; }
    bool operator<(const Sequence& other) const { return tokens < other.tokens; }
};

// throws invalid_sequence if empty or any index is outside [0, A)
void validate_sequence(const Sequence& x, const Alphabet& alphabet);

std::string format_sequence(const Sequence& x, const Alphabet& alphabet);
Sequence parse_sequence(const std::string& text, const Alphabet& alphabet);

int hamming_distance(const Sequence& a, const Sequence& b);

} // namespace corel

#endif

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "svgtk/normalize.hpp"
#include "svgtk/svg_model.hpp"

namespace svgtk {

inline constexpr int kImageCodebookSize = 16384;
inline constexpr int kImageSequenceLength = 576;
inline constexpr int kSvgTokenBudget = 12000;

enum class Cmd {
    M, L, C, Q, A, Z,
    Ellipse, Circle, Polygon, Rect,
    GroupOpen, GroupClose,
    DefsOpen, DefsClose,
    GradLinear, GradRadial, Stop,
    PathOpen, PathClose,
};
inline constexpr int kCmdCount = 19;

enum class Attr { Fill, Stroke, StrokeWidth, Opacity, FillRuleEvenOdd, Transform, GradRef, Id };
inline constexpr int kAttrCount = 8;

enum class Marker { ImgOpen, ImgClose, SvgOpen, SvgClose, Eos };
inline constexpr int kMarkerCount = 5;

struct Token {
    enum class Kind { Marker, Command, Attr, Flag, Coord, Color, Scalar, Image };
    Kind kind = Kind::Marker;
    // Marker/Command/Attr: enum value; Flag: 0|1; Coord: [0, canvas];
    // Color: one 8-bit channel; Scalar: fixed-point raw (value * 10^decimals);
    // Image: codebook id.
    std::int32_t value = 0;

    static Token marker(Marker m) { return {Kind::Marker, static_cast<std::int32_t>(m)}; }
    static Token command(Cmd c) { return {Kind::Command, static_cast<std::int32_t>(c)}; }
    static Token attr(Attr a) { return {Kind::Attr, static_cast<std::int32_t>(a)}; }
    static Token flag(int f) { return {Kind::Flag, f}; }
    static Token coord(int v) { return {Kind::Coord, v}; }
    static Token color(int channel) { return {Kind::Color, channel}; }
    static Token scalar_raw(std::int32_t raw) { return {Kind::Scalar, raw}; }
    static Token image(int id) { return {Kind::Image, id}; }

    friend bool operator==(const Token&, const Token&) = default;
};

struct TokenSequence {
    std::vector<Token> tokens;

    std::size_t size() const { return tokens.size(); }
    /// Tokens that count against the SVG budget (everything except markers and
    /// image tokens).
    std::size_t svg_token_count() const;

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Dense bidirectional token <-> integer id map. Classes are laid out in a
/// fixed order (markers, commands, attrs, flags, coords, color channels,
/// scalars, image tokens), so the mapping is fully determined by the config.
class Vocabulary {
public:
    explicit Vocabulary(const QuantizationConfig& cfg);

    int size() const { return total_; }
    int token_to_id(const Token& t) const;
    Token id_to_token(int id) const;

    int coord_count() const { return coords_; }
    int scalar_count() const { return scalars_; }
    int image_count() const { return kImageCodebookSize; }
    int scalar_raw_min() const { return -scalar_raw_max_; }
    int scalar_raw_max() const { return scalar_raw_max_; }
    const QuantizationConfig& config() const { return cfg_; }

    bool is_image_id(int id) const;
    bool is_coord_id(int id) const;

private:
    QuantizationConfig cfg_;
    int coords_ = 0;
    int scalars_ = 0;
    int scalar_raw_max_ = 0;
    int off_markers_ = 0, off_commands_ = 0, off_attrs_ = 0, off_flags_ = 0, off_coords_ = 0,
        off_colors_ = 0, off_scalars_ = 0, off_images_ = 0;
    int total_ = 0;
};

Vocabulary build_vocabulary(const QuantizationConfig& cfg = {});

/// Serializes a normalize_pipeline output into its token sequence (no
/// modality markers; pure SVG payload). Throws NotNormalized on non-integer
/// coordinates, out-of-vocabulary elements or non-canonical gradient ids.
TokenSequence tokenize(const SvgDocument& doc, const QuantizationConfig& cfg = {});

enum class DetokenizeMode { Strict, Lenient };

/// Strict mode inverts tokenize exactly or throws GrammarViolation. Lenient
/// mode materializes the longest valid prefix: incomplete trailing commands
/// are dropped, open groups/paths auto-close, and a GRAD_REF to a gradient
/// that has not been emitted renders as fill None. Marker wrappers
/// (<img>...</img>, <svg>...</svg>) are accepted and skipped.
SvgDocument detokenize(const TokenSequence& seq, DetokenizeMode mode,
                       const QuantizationConfig& cfg = {});

/// Whitespace-separated literal form, e.g. `<path> <fill> <c255> <c0> <c0> <M>
/// <p0> <p0> <Z> </path>`.
std::string tokens_to_text(const TokenSequence& seq);
TokenSequence tokens_from_text(std::string_view text);

/// Integer-id form, one id per line, using the vocabulary mapping.
std::string tokens_to_ids(const TokenSequence& seq, const Vocabulary& vocab);
TokenSequence tokens_from_ids(std::string_view text, const Vocabulary& vocab);

std::string token_to_string(const Token& t);

}  // namespace svgtk

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svgtk/metrics.hpp"
#include "svgtk/raster.hpp"
#include "svgtk/rng.hpp"
#include "svgtk/tokenize.hpp"

namespace svgtk {

/// Conditional / unconditional next-token distributions behind one seam. The
/// two calls share the prefix and differ only in whether the conditioning
/// input is supplied. The returned span covers the whole vocabulary, stays
/// finite, and is valid until the next call on the same generator.
struct GeneratorInterface {
    virtual ~GeneratorInterface() = default;
    virtual std::span<const double> next_logits(const TokenSequence& prefix, bool conditioned) = 0;
};

/// Scores a candidate image against the conditioning input, higher is better.
struct VerifierInterface {
    virtual ~VerifierInterface() = default;
    virtual double score(const RasterImage& image, std::string_view condition) const = 0;
};

/// Turns one full image-token rollout into a raster (neural decoder seam).
struct ImageDecoderInterface {
    virtual ~ImageDecoderInterface() = default;
    virtual RasterImage decode(std::span<const Token> image_tokens) const = 0;
};

struct DecodeConfig {
    int n_candidates = 3;         // N
    int rejection_budget = 3;     // M
    int chunk_size = 64;          // K
    double guidance_scale = 5.0;  // gamma
    double temperature = 1.0;
    int top_k = 0;  // 0 = off
    int svg_token_budget = kSvgTokenBudget;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CandidateRecord {
    int index = 0;
    double score = 0;
};

struct ChunkRecord {
    int index = 0;
    int attempts = 0;
    double accepted_distance = 0;
};

struct DecodeTrace {
    std::vector<CandidateRecord> candidates;
    int selected = 0;
    std::vector<ChunkRecord> chunks;
    int rejections_used = 0;
    bool truncated = false;

    std::string to_json() const;
};

struct DecodeState {
    TokenSequence accepted;  // accepted SVG payload tokens
    RasterImage best_image;  // I*
    std::vector<Token> best_image_tokens;
    std::vector<double> distance_history;  // accepted d(R_t, I*)
    int rejections_used = 0;
    bool closed = false;  // generator emitted the close marker itself
    DecodeTrace trace;
    std::uint64_t svg_tokens_sampled = 0;  // includes rejected chunks
};

/// Eq.-style classifier-free guidance combination:
/// uncond + guidance_scale * (cond - uncond), elementwise.
std::vector<double> cfg_logits(std::span<const double> cond, std::span<const double> uncond,
                               double guidance_scale);

struct Candidate {
    std::vector<Token> image_tokens;
    RasterImage image;
};

/// N independent CFG rollouts of exactly 576 image tokens each, decoded to
/// rasters. Rollout r draws from the sub-stream (seed, r).
std::vector<Candidate> sample_image_candidates(GeneratorInterface& gen,
                                               const ImageDecoderInterface& decoder,
                                               const Vocabulary& vocab, const DecodeConfig& cfg);

/// Index of the best-scoring candidate; ties break to the lowest index.
int select_candidate(const std::vector<Candidate>& candidates, const VerifierInterface& verifier,
                     std::string_view condition);

/// Image-guided chunked resampling: sample K SVG tokens, render the lenient
/// provisional document, and accept the chunk only if its distance to I* does
/// not increase, spending at most M rejections per SVG. Returns the final
/// payload terminated by the close marker (auto-appended on budget
/// truncation). `state` must hold I* and its tokens.
TokenSequence resample_decode(GeneratorInterface& gen, DecodeState& state, const DecodeConfig& cfg,
                              const PerceptualInterface& perceptual, const Vocabulary& vocab);

struct RunResult {
    SvgDocument document;
    DecodeState state;
};

/// Full two-stage pipeline: visual candidate selection, then image-guided
/// resampling, then detokenization (strict when the stream closed itself,
/// lenient after budget truncation).
RunResult run_tts(GeneratorInterface& gen, const VerifierInterface& verifier,
                  const PerceptualInterface& perceptual, const ImageDecoderInterface& decoder,
                  const Vocabulary& vocab, const DecodeConfig& cfg, std::string_view condition);

/// Reference baseline: same image stage, then n_rollouts full uncontrolled SVG
/// rollouts; keeps the rollout whose render is closest to I*.
RunResult run_best_of_n(GeneratorInterface& gen, const VerifierInterface& verifier,
                        const PerceptualInterface& perceptual, const ImageDecoderInterface& decoder,
                        const Vocabulary& vocab, const DecodeConfig& cfg,
                        std::string_view condition, int n_rollouts);

// ---------------------------------------------------------------------------
// seeded mock generator: replays a ground-truth sequence with optional
// per-chunk coordinate corruption, making the whole controller testable at
// desk scale

class MockGenerator final : public GeneratorInterface {
public:
    /// `image_variant_ids` are the image-token ids offered at the first image
    /// position; a rollout's identity is the first id it samples (later
    /// positions repeat it). corruption_p is the per-chunk probability of
    /// substituting one coordinate token of the ground truth with a uniform
    /// random coordinate; resampling a rejected chunk redraws independently.
    MockGenerator(TokenSequence ground_truth_svg, const Vocabulary& vocab, double corruption_p,
                  int chunk_size, std::uint64_t seed, std::vector<int> image_variant_ids);

    /// Overrides the random corruption for one chunk: on the chunk's first
    /// attempt, the coordinate at `offset` is replaced with `token`.
    void force_corruption(int chunk_index, int offset_in_chunk, Token token);

    std::span<const double> next_logits(const TokenSequence& prefix, bool conditioned) override;

private:
    void start_group(int group);

    TokenSequence gt_;
    const Vocabulary& vocab_;
    double corruption_p_;
    int chunk_size_;
    Rng rng_;
    std::vector<int> variant_ids_;

    struct Forced {
        int chunk, offset;
        Token token;
    };
    std::vector<Forced> forced_;
    std::vector<int> group_attempts_;
    int cur_group_ = -1;
    int corrupt_offset_ = -1;
    Token corrupt_token_{};

    std::vector<double> cond_;
    std::vector<double> uncond_;
    std::vector<int> raised_;  // vocabulary ids currently peaked in cond_
};

class MockImageDecoder final : public ImageDecoderInterface {
public:
    struct Variant {
        int image_token_id;
        RasterImage image;
    };
    explicit MockImageDecoder(std::vector<Variant> variants);
    RasterImage decode(std::span<const Token> image_tokens) const override;

private:
    std::vector<Variant> variants_;
};

}  // namespace svgtk

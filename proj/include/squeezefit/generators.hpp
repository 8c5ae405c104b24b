#pragma once

#include <cstdint>
#include <optional>

#include "squeezefit/dataset.hpp"

namespace sqz {

/// Points e_1..e_r labeled 0 and the origin labeled 1, in R^d. Δ-fixed with
/// Δ = 1; contact vectors ±e_i.
LabeledDataset generate_simplex_base(Index r, Index d);

/// Vertices of {0,1}^r labeled by coordinate parity, in R^r. Δ-fixed with
/// Δ = 1; contact vectors ±e_i (each realized by 2^{r-1} cube edges).
LabeledDataset generate_cube_base(Index r);

enum class BaseKind { simplex, cube, custom };

/// Synthetic model: a Δ-fixed base configuration spanning an r-dimensional
/// subspace T, with b noisy replicates of every base point whose noise is
/// N(0, σ² (I - Π)).
struct PlantedModel {
    Index d = 20;
    Index r = 3;
    Index a = 4;
    Index b = 1;
    double sigma = 0.0;
    double delta = 1.0;
    BaseKind base = BaseKind::simplex;
    /// Base points in r intrinsic coordinates; required when base == custom.
    std::optional<LabeledDataset> custom_base;
    /// Embed T by a seeded random rotation; otherwise T = span{e_1..e_r}.
    bool random_embedding = true;

    void validate() const;
};

struct PlantedSample {
    LabeledDataset data;
    MatrixXd pi;      // orthogonal projection onto T
    MatrixXd basis;   // d x r orthonormal basis of T
    LabeledDataset base;  // embedded, rescaled base points
};

/// Base points in intrinsic coordinates, rescaled so their shortest
/// cross-class difference has length `model.delta`.
LabeledDataset planted_base(const PlantedModel& model);

PlantedSample generate_planted(const PlantedModel& model, std::uint64_t seed);

/// Parameters of the two-class, rank-one demonstration set. The generator is a
/// reconstruction: classes are separated along a hidden unit direction u by at
/// least `margin`, while isotropic noise in u^⊥ with standard deviation
/// `spread` dominates the label-blind variance.
struct Figure1Params {
    Index per_class = 30;
    double margin = 2.0;
    double jitter = 0.5;   // extra spread of the u-coordinate beyond the margin
    double spread = 2.0;   // noise standard deviation in u^⊥
};

PlantedSample generate_figure1(std::uint64_t seed, const Figure1Params& params = {});

} // namespace sqz

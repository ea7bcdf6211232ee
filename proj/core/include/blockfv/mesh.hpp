#pragma once

// Minimal unstructured finite-volume mesh with owner/neighbour face
// addressing. Internal faces are stored upper-triangular (owner <
// neighbour) with the area vector pointing owner -> neighbour.

#include "blockfv/vec3.hpp"

#include <string>
#include <vector>

namespace fvb {

struct InternalFace {
    int owner = -1;
    int neighbour = -1;
    Vec3 areaVector;     // m^2, owner -> neighbour
    double fx = 0.5;     // owner interpolation weight, in (0,1)
};

enum class PatchKind { wall, inlet, outlet, farfield, slip, symmetry };

PatchKind patchKindFromString(const std::string& s);
std::string to_string(PatchKind k);

struct BoundaryFace {
    int cell = -1;
    Vec3 areaVector;     // outward
};

struct BoundaryPatch {
    std::string name;
    PatchKind kind = PatchKind::wall;
    std::vector<BoundaryFace> faces;
};

class Mesh {
public:
    int nCells() const { return static_cast<int>(cellVolumes_.size()); }
    int nInternalFaces() const { return static_cast<int>(faces_.size()); }

    const std::vector<double>& cellVolumes() const { return cellVolumes_; }
    const std::vector<Vec3>& cellCentroids() const { return cellCentroids_; }
    const std::vector<InternalFace>& faces() const { return faces_; }
    const std::vector<BoundaryPatch>& patches() const { return patches_; }
    const BoundaryPatch* findPatch(const std::string& name) const;

    // Owner-to-neighbour centroid vector of face f.
    Vec3 centroidDelta(int f) const {
        const InternalFace& face = faces_[f];
        return cellCentroids_[face.neighbour] - cellCentroids_[face.owner];
    }

    // Interpolated face centre, exact for the orthogonal meshes in scope.
    Vec3 faceCentre(int f) const {
        const InternalFace& face = faces_[f];
        return cellCentroids_[face.owner] * face.fx +
               cellCentroids_[face.neighbour] * (1.0 - face.fx);
    }

    // Validates all mesh invariants, throws std::runtime_error naming the
    // offending cell or face.
    void validate() const;

    void save(const std::string& path) const;

    // Raw constructor for generators and the loader; enforces the
    // owner < neighbour convention by swapping and negating.
    static Mesh fromComponents(std::vector<double> volumes,
                               std::vector<Vec3> centroids,
                               std::vector<InternalFace> faces,
                               std::vector<BoundaryPatch> patches,
                               bool check = true);

private:
    std::vector<double> cellVolumes_;
    std::vector<Vec3> cellCentroids_;
    std::vector<InternalFace> faces_;
    std::vector<BoundaryPatch> patches_;
};

// Uniform quad mesh of nx x ny cells over lengths.x x lengths.y, unit
// depth. Patches: left (inlet), right (outlet), bottom (wall), top (wall).
Mesh generateStructured2d(int nx, int ny, const Vec3& lengths);

// Row of n cells with unit cross-section and slip side patches; end
// patches "left" (inlet) and "right" (outlet).
Mesh generate1dTube(int n, double length);

// Text mesh format loader; invariants are checked on load.
Mesh loadMesh(const std::string& path);

} // namespace fvb

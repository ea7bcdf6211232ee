#include "blockfv/mesh.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fvb {

PatchKind patchKindFromString(const std::string& s) {
    if (s == "wall") return PatchKind::wall;
    if (s == "inlet") return PatchKind::inlet;
    if (s == "outlet") return PatchKind::outlet;
    if (s == "farfield") return PatchKind::farfield;
    if (s == "slip") return PatchKind::slip;
    if (s == "symmetry") return PatchKind::symmetry;
    throw std::invalid_argument("unknown patch kind: " + s);
}

std::string to_string(PatchKind k) {
    switch (k) {
        case PatchKind::wall: return "wall";
        case PatchKind::inlet: return "inlet";
        case PatchKind::outlet: return "outlet";
        case PatchKind::farfield: return "farfield";
        case PatchKind::slip: return "slip";
        case PatchKind::symmetry: return "symmetry";
    }
    return "wall";
}

const BoundaryPatch* Mesh::findPatch(const std::string& name) const {
    for (const auto& p : patches_)
        if (p.name == name) return &p;
    return nullptr;
}

void Mesh::validate() const {
    const int nc = nCells();
    if (nc == 0) throw std::runtime_error("mesh has no cells");
    for (int c = 0; c < nc; ++c)
        if (!(cellVolumes_[c] > 0.0))
            throw std::runtime_error("cell " + std::to_string(c) + " has non-positive volume");

    for (std::size_t f = 0; f < faces_.size(); ++f) {
        const InternalFace& face = faces_[f];
        if (face.owner < 0 || face.owner >= nc || face.neighbour < 0 || face.neighbour >= nc)
            throw std::runtime_error("face " + std::to_string(f) + " has out-of-range cell index");
        if (face.owner == face.neighbour)
            throw std::runtime_error("face " + std::to_string(f) + " has owner == neighbour");
        if (face.owner > face.neighbour)
            throw std::runtime_error("face " + std::to_string(f) + " violates owner < neighbour ordering");
        if (!(face.fx > 0.0 && face.fx < 1.0))
            throw std::runtime_error("face " + std::to_string(f) + " has interpolation weight outside (0,1)");
    }

    // Geometric closure: per cell the signed sum of face area vectors
    // must vanish within 1e-12 of the total face area.
    std::vector<Vec3> sum(nc);
    std::vector<double> areaSum(nc, 0.0);
    for (const InternalFace& face : faces_) {
        sum[face.owner] += face.areaVector;
        sum[face.neighbour] -= face.areaVector;
        const double a = mag(face.areaVector);
        areaSum[face.owner] += a;
        areaSum[face.neighbour] += a;
    }
    for (const BoundaryPatch& p : patches_)
        for (const BoundaryFace& bf : p.faces) {
            if (bf.cell < 0 || bf.cell >= nc)
                throw std::runtime_error("boundary face in patch " + p.name + " has out-of-range cell");
            sum[bf.cell] += bf.areaVector;
            areaSum[bf.cell] += mag(bf.areaVector);
        }
    for (int c = 0; c < nc; ++c)
        if (mag(sum[c]) > 1e-12 * areaSum[c])
            throw std::runtime_error("cell " + std::to_string(c) + " is not geometrically closed");
}

Mesh Mesh::fromComponents(std::vector<double> volumes, std::vector<Vec3> centroids,
                          std::vector<InternalFace> faces,
                          std::vector<BoundaryPatch> patches, bool check) {
    for (InternalFace& f : faces)
        if (f.owner > f.neighbour) {
            std::swap(f.owner, f.neighbour);
            f.areaVector = -f.areaVector;
            f.fx = 1.0 - f.fx;
        }
    Mesh m;
    m.cellVolumes_ = std::move(volumes);
    m.cellCentroids_ = std::move(centroids);
    m.faces_ = std::move(faces);
    m.patches_ = std::move(patches);
    if (check) m.validate();
    return m;
}

Mesh generateStructured2d(int nx, int ny, const Vec3& lengths) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("generateStructured2d: nx and ny must be >= 1");
    if (!(lengths.x > 0.0 && lengths.y > 0.0))
        throw std::invalid_argument("generateStructured2d: lengths must be positive");

    const double dx = lengths.x / nx;
    const double dy = lengths.y / ny;
    const double vol = dx * dy;  // unit depth
    auto cellId = [nx](int i, int j) { return j * nx + i; };

    std::vector<double> volumes(static_cast<std::size_t>(nx) * ny, vol);
    std::vector<Vec3> centroids(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            centroids[cellId(i, j)] = {(i + 0.5) * dx, (j + 0.5) * dy, 0.0};

    // Faces in upper-triangular order: owner ascending, then neighbour.
    std::vector<InternalFace> faces;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (i + 1 < nx)
                faces.push_back({cellId(i, j), cellId(i + 1, j), {dy, 0.0, 0.0}, 0.5});
            if (j + 1 < ny)
                faces.push_back({cellId(i, j), cellId(i, j + 1), {0.0, dx, 0.0}, 0.5});
        }

    BoundaryPatch left{"left", PatchKind::inlet, {}};
    BoundaryPatch right{"right", PatchKind::outlet, {}};
    BoundaryPatch bottom{"bottom", PatchKind::wall, {}};
    BoundaryPatch top{"top", PatchKind::wall, {}};
    for (int j = 0; j < ny; ++j) {
        left.faces.push_back({cellId(0, j), {-dy, 0.0, 0.0}});
        right.faces.push_back({cellId(nx - 1, j), {dy, 0.0, 0.0}});
    }
    for (int i = 0; i < nx; ++i) {
        bottom.faces.push_back({cellId(i, 0), {0.0, -dx, 0.0}});
        top.faces.push_back({cellId(i, ny - 1), {0.0, dx, 0.0}});
    }

    return Mesh::fromComponents(std::move(volumes), std::move(centroids), std::move(faces),
                                {left, right, bottom, top});
}

Mesh generate1dTube(int n, double length) {
    if (n < 2) throw std::invalid_argument("generate1dTube: need at least 2 cells");
    if (!(length > 0.0)) throw std::invalid_argument("generate1dTube: length must be positive");

    const double dx = length / n;
    std::vector<double> volumes(n, dx);  // unit cross-section
    std::vector<Vec3> centroids(n);
    for (int i = 0; i < n; ++i) centroids[i] = {(i + 0.5) * dx, 0.0, 0.0};

    std::vector<InternalFace> faces;
    for (int i = 0; i + 1 < n; ++i)
        faces.push_back({i, i + 1, {1.0, 0.0, 0.0}, 0.5});

    BoundaryPatch left{"left", PatchKind::inlet, {{0, {-1.0, 0.0, 0.0}}}};
    BoundaryPatch right{"right", PatchKind::outlet, {{n - 1, {1.0, 0.0, 0.0}}}};
    BoundaryPatch sides{"sides", PatchKind::slip, {}};
    for (int i = 0; i < n; ++i) {
        sides.faces.push_back({i, {0.0, dx, 0.0}});
        sides.faces.push_back({i, {0.0, -dx, 0.0}});
    }

    return Mesh::fromComponents(std::move(volumes), std::move(centroids), std::move(faces),
                                {left, right, sides});
}

namespace {

// Tokenizer stripping '#' comments, tracking line numbers for errors.
class MeshTokens {
public:
    explicit MeshTokens(std::istream& in) : in_(in) {}

    std::string next() {
        for (;;) {
            if (!(line_ >> tok_)) {
                std::string raw;
                if (!std::getline(in_, raw)) throw err("unexpected end of file");
                ++lineNo_;
                const auto h = raw.find('#');
                if (h != std::string::npos) raw.erase(h);
                line_ = std::istringstream(raw);
                continue;
            }
            return tok_;
        }
    }

    int nextInt() {
        const std::string t = next();
        try { return std::stoi(t); }
        catch (...) { throw err("expected integer, got '" + t + "'"); }
    }

    double nextDouble() {
        const std::string t = next();
        try { return std::stod(t); }
        catch (...) { throw err("expected number, got '" + t + "'"); }
    }

    std::runtime_error err(const std::string& what) const {
        return std::runtime_error("mesh parse error at line " + std::to_string(lineNo_) + ": " + what);
    }

private:
    std::istream& in_;
    std::istringstream line_;
    std::string tok_;
    int lineNo_ = 0;
};

} // namespace

Mesh loadMesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);
    MeshTokens tk(in);

    if (tk.next() != "blockmesh" || tk.next() != "v1")
        throw tk.err("expected header 'blockmesh v1'");

    if (tk.next() != "cells") throw tk.err("expected 'cells'");
    const int nc = tk.nextInt();
    std::vector<double> volumes(nc);
    std::vector<Vec3> centroids(nc);
    for (int c = 0; c < nc; ++c) {
        volumes[c] = tk.nextDouble();
        centroids[c] = {tk.nextDouble(), tk.nextDouble(), tk.nextDouble()};
    }

    if (tk.next() != "faces") throw tk.err("expected 'faces'");
    const int nf = tk.nextInt();
    std::vector<InternalFace> faces(nf);
    for (int f = 0; f < nf; ++f) {
        faces[f].owner = tk.nextInt();
        faces[f].neighbour = tk.nextInt();
        faces[f].areaVector = {tk.nextDouble(), tk.nextDouble(), tk.nextDouble()};
        faces[f].fx = tk.nextDouble();
    }

    std::vector<BoundaryPatch> patches;
    for (;;) {
        std::string kw;
        try { kw = tk.next(); }
        catch (const std::runtime_error&) { break; }  // clean EOF
        if (kw != "patch") throw tk.err("expected 'patch', got '" + kw + "'");
        BoundaryPatch p;
        p.name = tk.next();
        p.kind = patchKindFromString(tk.next());
        const int k = tk.nextInt();
        p.faces.resize(k);
        for (int i = 0; i < k; ++i) {
            p.faces[i].cell = tk.nextInt();
            p.faces[i].areaVector = {tk.nextDouble(), tk.nextDouble(), tk.nextDouble()};
        }
        patches.push_back(std::move(p));
    }

    return Mesh::fromComponents(std::move(volumes), std::move(centroids), std::move(faces),
                                std::move(patches));
}

void Mesh::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open mesh file for writing: " + path);
    out.precision(17);
    out << "blockmesh v1\n";
    out << "cells " << nCells() << "\n";
    for (int c = 0; c < nCells(); ++c) {
        const Vec3& x = cellCentroids_[c];
        out << cellVolumes_[c] << " " << x.x << " " << x.y << " " << x.z << "\n";
    }
    out << "faces " << nInternalFaces() << "\n";
    for (const InternalFace& f : faces_)
        out << f.owner << " " << f.neighbour << " " << f.areaVector.x << " "
            << f.areaVector.y << " " << f.areaVector.z << " " << f.fx << "\n";
    for (const BoundaryPatch& p : patches_) {
        out << "patch " << p.name << " " << to_string(p.kind) << " " << p.faces.size() << "\n";
        for (const BoundaryFace& bf : p.faces)
            out << bf.cell << " " << bf.areaVector.x << " " << bf.areaVector.y << " "
                << bf.areaVector.z << "\n";
    }
}

} // namespace fvb

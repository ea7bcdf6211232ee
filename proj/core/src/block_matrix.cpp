#include "blockfv/block_matrix.hpp"

#include "blockfv/smallmat.hpp"

#include <sstream>
#include <stdexcept>

namespace fvb {

BlockLduMatrix::BlockLduMatrix(const Mesh& mesh, const std::vector<VariableDescriptor>& variables)
    : mesh_(&mesh), nCells_(mesh.nCells()), nFaces_(mesh.nInternalFaces()) {
    if (variables.empty())
        throw std::invalid_argument("BlockLduMatrix: variable list must not be empty");

    // Vector variables first, then scalars, each group in declaration order.
    for (const auto& v : variables)
        if (v.size == 3) variables_.push_back(v);
    for (const auto& v : variables) {
        if (v.size == 1) variables_.push_back(v);
        else if (v.size != 3)
            throw std::invalid_argument("BlockLduMatrix: variable size must be 1 or 3");
    }
    for (const auto& v : variables_) n_ += v.size;

    diag_.assign(blkOff(nCells_), 0.0);
    upper_.assign(blkOff(nFaces_), 0.0);
    lower_.assign(blkOff(nFaces_), 0.0);
}

void BlockLduMatrix::setZero() {
    std::fill(diag_.begin(), diag_.end(), 0.0);
    std::fill(upper_.begin(), upper_.end(), 0.0);
    std::fill(lower_.begin(), lower_.end(), 0.0);
}

void BlockLduMatrix::addFaceContribution(int face, const double* ownerDiag,
                                         const double* neighbourDiag, const double* upperBlk,
                                         const double* lowerBlk) {
    if (face < 0 || face >= nFaces_)
        throw std::invalid_argument("addFaceContribution: face index out of range");
    const InternalFace& f = mesh_->faces()[face];
    const int nn = n_ * n_;
    double* dO = diag(f.owner);
    double* dN = diag(f.neighbour);
    double* u = upper(face);
    double* l = lower(face);
    for (int k = 0; k < nn; ++k) {
        if (ownerDiag) dO[k] += ownerDiag[k];
        if (neighbourDiag) dN[k] += neighbourDiag[k];
        if (upperBlk) u[k] += upperBlk[k];
        if (lowerBlk) l[k] += lowerBlk[k];
    }
}

SubBlockView BlockLduMatrix::view(const std::string& rowVar, const std::string& colVar) const {
    SubBlockView v;
    bool rowFound = false, colFound = false;
    int off = 0;
    for (const auto& var : variables_) {
        if (var.name == rowVar) { v.rowStart = off; v.rowSize = var.size; rowFound = true; }
        if (var.name == colVar) { v.colStart = off; v.colSize = var.size; colFound = true; }
        off += var.size;
    }
    if (!rowFound || !colFound)
        throw std::invalid_argument("BlockLduMatrix::view: unknown variable name");
    return v;
}

double* BlockLduMatrix::partPtr(BlockPart part, int blockIdx) {
    switch (part) {
        case BlockPart::diag:
            if (blockIdx < 0 || blockIdx >= nCells_) throw std::invalid_argument("sub-block cell index out of range");
            return diag(blockIdx);
        case BlockPart::upper:
            if (blockIdx < 0 || blockIdx >= nFaces_) throw std::invalid_argument("sub-block face index out of range");
            return upper(blockIdx);
        case BlockPart::lower:
            if (blockIdx < 0 || blockIdx >= nFaces_) throw std::invalid_argument("sub-block face index out of range");
            return lower(blockIdx);
    }
    return nullptr;
}

const double* BlockLduMatrix::partPtr(BlockPart part, int blockIdx) const {
    return const_cast<BlockLduMatrix*>(this)->partPtr(part, blockIdx);
}

double BlockLduMatrix::subEntry(const SubBlockView& v, int blockIdx, BlockPart part, int r, int c) const {
    if (r < 0 || r >= v.rowSize || c < 0 || c >= v.colSize ||
        v.rowStart + v.rowSize > n_ || v.colStart + v.colSize > n_)
        throw std::invalid_argument("subEntry: view out of range");
    const double* b = partPtr(part, blockIdx);
    return b[static_cast<std::size_t>(v.rowStart + r) * n_ + (v.colStart + c)];
}

double& BlockLduMatrix::subEntry(const SubBlockView& v, int blockIdx, BlockPart part, int r, int c) {
    if (r < 0 || r >= v.rowSize || c < 0 || c >= v.colSize ||
        v.rowStart + v.rowSize > n_ || v.colStart + v.colSize > n_)
        throw std::invalid_argument("subEntry: view out of range");
    double* b = partPtr(part, blockIdx);
    return b[static_cast<std::size_t>(v.rowStart + r) * n_ + (v.colStart + c)];
}

void blockMatvec(const BlockLduMatrix& A, const double* x, double* y) {
    const int n = A.blockSize();
    const int nc = A.nCells();
    for (std::size_t k = 0; k < static_cast<std::size_t>(nc) * n; ++k) y[k] = 0.0;
    for (int c = 0; c < nc; ++c)
        smallmat::matvecAdd(A.diag(c), x + static_cast<std::size_t>(c) * n,
                            y + static_cast<std::size_t>(c) * n, n);
    const auto& faces = A.mesh().faces();
    for (int f = 0; f < A.nFaces(); ++f) {
        const InternalFace& face = faces[f];
        smallmat::matvecAdd(A.upper(f), x + static_cast<std::size_t>(face.neighbour) * n,
                            y + static_cast<std::size_t>(face.owner) * n, n);
        smallmat::matvecAdd(A.lower(f), x + static_cast<std::size_t>(face.owner) * n,
                            y + static_cast<std::size_t>(face.neighbour) * n, n);
    }
}

BlockVector blockMatvec(const BlockLduMatrix& A, const BlockVector& x) {
    if (x.blockSize != A.blockSize() || x.nCells() != A.nCells())
        throw std::invalid_argument("blockMatvec: size mismatch");
    BlockVector y(A.nCells(), A.blockSize());
    blockMatvec(A, x.values.data(), y.values.data());
    return y;
}

std::string BlockLduMatrix::dump() const {
    std::ostringstream os;
    os.precision(17);
    const int n = n_;
    auto emit = [&](int row, int col, const double* b) {
        os << row << " " << col << " ";
        for (int k = 0; k < n * n; ++k) os << " " << b[k];
        os << "\n";
    };
    for (int c = 0; c < nCells_; ++c) emit(c, c, diag(c));
    const auto& faces = mesh_->faces();
    for (int f = 0; f < nFaces_; ++f) {
        emit(faces[f].owner, faces[f].neighbour, upper(f));
        emit(faces[f].neighbour, faces[f].owner, lower(f));
    }
    return os.str();
}

} // namespace fvb

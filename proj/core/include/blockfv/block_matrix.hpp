#pragma once

// Face-addressed block LDU matrix for coupled systems: one dense n x n
// diagonal block per cell, one upper and one lower block per internal
// face. The source term lives in a separate BlockVector.

#include "blockfv/mesh.hpp"

#include <span>
#include <string>
#include <vector>

namespace fvb {

struct VariableDescriptor {
    std::string name;
    int size = 1;  // 1 for scalars, 3 for vectors
};

struct BlockVector {
    int blockSize = 0;
    std::vector<double> values;  // nCells * blockSize, contiguous per cell

    BlockVector() = default;
    BlockVector(int nCells, int n) : blockSize(n), values(static_cast<std::size_t>(nCells) * n, 0.0) {}

    int nCells() const { return blockSize ? static_cast<int>(values.size()) / blockSize : 0; }
    double* cell(int i) { return values.data() + static_cast<std::size_t>(i) * blockSize; }
    const double* cell(int i) const { return values.data() + static_cast<std::size_t>(i) * blockSize; }
};

// (rowVar, colVar) window into an n x n block.
struct SubBlockView {
    int rowStart = 0, rowSize = 1;
    int colStart = 0, colSize = 1;
};

enum class BlockPart { diag, upper, lower };

class BlockLduMatrix {
public:
    BlockLduMatrix(const Mesh& mesh, const std::vector<VariableDescriptor>& variables);

    int blockSize() const { return n_; }
    int nCells() const { return nCells_; }
    int nFaces() const { return nFaces_; }
    const Mesh& mesh() const { return *mesh_; }
    const std::vector<VariableDescriptor>& variables() const { return variables_; }

    double* diag(int cell) { return diag_.data() + blkOff(cell); }
    const double* diag(int cell) const { return diag_.data() + blkOff(cell); }
    double* upper(int face) { return upper_.data() + blkOff(face); }
    const double* upper(int face) const { return upper_.data() + blkOff(face); }
    double* lower(int face) { return lower_.data() + blkOff(face); }
    const double* lower(int face) const { return lower_.data() + blkOff(face); }

    std::span<const double> diagValues() const { return diag_; }
    std::span<const double> upperValues() const { return upper_; }
    std::span<const double> lowerValues() const { return lower_; }

    // Accumulates (adds) the four face-local blocks of one internal face.
    void addFaceContribution(int face, const double* ownerDiag, const double* neighbourDiag,
                             const double* upper, const double* lower);

    // View of a variable pair by name; layout is vector variables first.
    SubBlockView view(const std::string& rowVar, const std::string& colVar) const;

    double subEntry(const SubBlockView& v, int blockIdx, BlockPart part, int r, int c) const;
    double& subEntry(const SubBlockView& v, int blockIdx, BlockPart part, int r, int c);

    void setZero();

    // Text dump in global scalar coordinates: `row col  b00 b01 ...`
    std::string dump() const;

private:
    std::size_t blkOff(int i) const { return static_cast<std::size_t>(i) * n_ * n_; }
    double* partPtr(BlockPart part, int blockIdx);
    const double* partPtr(BlockPart part, int blockIdx) const;

    const Mesh* mesh_ = nullptr;
    std::vector<VariableDescriptor> variables_;
    int n_ = 0;
    int nCells_ = 0;
    int nFaces_ = 0;
    std::vector<double> diag_, upper_, lower_;
};

// y = A x with LDU addressing.
BlockVector blockMatvec(const BlockLduMatrix& A, const BlockVector& x);
void blockMatvec(const BlockLduMatrix& A, const double* x, double* y);

} // namespace fvb

#include "blockfv/block_csr.hpp"

#include "blockfv/smallmat.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace fvb {

int BlockCsrMatrix::find(int row, int col) const {
    const int b = rowOffsets[row];
    const int e = rowOffsets[row + 1];
    const auto it = std::lower_bound(colIndices.begin() + b, colIndices.begin() + e, col);
    if (it != colIndices.begin() + e && *it == col)
        return static_cast<int>(it - colIndices.begin());
    return -1;
}

void BlockCsrMatrix::validate() const {
    if (static_cast<int>(rowOffsets.size()) != nRows + 1)
        throw std::runtime_error("BlockCsrMatrix: rowOffsets size mismatch");
    if (rowOffsets.front() != 0 || rowOffsets.back() != nnz())
        throw std::runtime_error("BlockCsrMatrix: rowOffsets endpoints invalid");
    for (int r = 0; r < nRows; ++r) {
        if (rowOffsets[r] > rowOffsets[r + 1])
            throw std::runtime_error("BlockCsrMatrix: rowOffsets not non-decreasing");
        bool hasDiag = false;
        for (int k = rowOffsets[r]; k < rowOffsets[r + 1]; ++k) {
            if (k > rowOffsets[r] && colIndices[k] <= colIndices[k - 1])
                throw std::runtime_error("BlockCsrMatrix: columns not strictly increasing in row " + std::to_string(r));
            if (colIndices[k] == r) hasDiag = true;
        }
        if (!hasDiag)
            throw std::runtime_error("BlockCsrMatrix: missing diagonal block in row " + std::to_string(r));
    }
    if (values.size() != static_cast<std::size_t>(nnz()) * blockSize * blockSize)
        throw std::runtime_error("BlockCsrMatrix: values size mismatch");
}

namespace {

// Per-block permutation plan from an LDU addressing: for each CSR slot,
// which LDU block (part, index) fills it.
struct SlotSource {
    BlockPart part;
    int index;
};

struct CsrPlan {
    std::vector<int> rowOffsets;
    std::vector<int> colIndices;
    std::vector<SlotSource> sources;
};

CsrPlan buildPlan(const BlockLduMatrix& A) {
    const int nc = A.nCells();
    const auto& faces = A.mesh().faces();

    struct Entry { int col; SlotSource src; };
    std::vector<std::vector<Entry>> rows(nc);
    for (int c = 0; c < nc; ++c) rows[c].push_back({c, {BlockPart::diag, c}});
    for (int f = 0; f < A.nFaces(); ++f) {
        rows[faces[f].owner].push_back({faces[f].neighbour, {BlockPart::upper, f}});
        rows[faces[f].neighbour].push_back({faces[f].owner, {BlockPart::lower, f}});
    }

    CsrPlan plan;
    plan.rowOffsets.resize(nc + 1, 0);
    for (int r = 0; r < nc; ++r) {
        std::sort(rows[r].begin(), rows[r].end(),
                  [](const Entry& a, const Entry& b) { return a.col < b.col; });
        plan.rowOffsets[r + 1] = plan.rowOffsets[r] + static_cast<int>(rows[r].size());
        for (const Entry& e : rows[r]) {
            plan.colIndices.push_back(e.col);
            plan.sources.push_back(e.src);
        }
    }
    return plan;
}

const double* lduBlock(const BlockLduMatrix& A, const SlotSource& s) {
    switch (s.part) {
        case BlockPart::diag: return A.diag(s.index);
        case BlockPart::upper: return A.upper(s.index);
        case BlockPart::lower: return A.lower(s.index);
    }
    return nullptr;
}

double* lduBlock(BlockLduMatrix& A, const SlotSource& s) {
    return const_cast<double*>(lduBlock(static_cast<const BlockLduMatrix&>(A), s));
}

} // namespace

BlockCsrMatrix lduToBlockCsr(const BlockLduMatrix& A) {
    const CsrPlan plan = buildPlan(A);
    const int n = A.blockSize();
    BlockCsrMatrix csr;
    csr.nRows = A.nCells();
    csr.blockSize = n;
    csr.rowOffsets = plan.rowOffsets;
    csr.colIndices = plan.colIndices;
    csr.values.resize(static_cast<std::size_t>(csr.nnz()) * n * n);
    for (int k = 0; k < csr.nnz(); ++k)
        std::memcpy(csr.block(k), lduBlock(A, plan.sources[k]), sizeof(double) * n * n);
    return csr;
}

void blockCsrToLdu(const BlockCsrMatrix& csr, BlockLduMatrix& A) {
    if (topologySignature(csr) != topologySignature(A) || csr.blockSize != A.blockSize())
        throw std::runtime_error("blockCsrToLdu: structure mismatch");
    const CsrPlan plan = buildPlan(A);
    const int n = A.blockSize();
    for (int k = 0; k < csr.nnz(); ++k)
        std::memcpy(lduBlock(A, plan.sources[k]), csr.block(k), sizeof(double) * n * n);
}

void replaceValues(BlockCsrMatrix& csr, const BlockLduMatrix& A) {
    if (topologySignature(csr) != topologySignature(A) || csr.blockSize != A.blockSize())
        throw std::runtime_error("replaceValues: structure mismatch, re-run setup");
    const CsrPlan plan = buildPlan(A);
    const int n = A.blockSize();
    for (int k = 0; k < csr.nnz(); ++k)
        std::memcpy(csr.block(k), lduBlock(A, plan.sources[k]), sizeof(double) * n * n);
}

void csrMatvec(const BlockCsrMatrix& A, const double* x, double* y) {
    const int n = A.blockSize;
    for (int r = 0; r < A.nRows; ++r) {
        double* yr = y + static_cast<std::size_t>(r) * n;
        for (int i = 0; i < n; ++i) yr[i] = 0.0;
        for (int k = A.rowOffsets[r]; k < A.rowOffsets[r + 1]; ++k)
            smallmat::matvecAdd(A.block(k), x + static_cast<std::size_t>(A.colIndices[k]) * n, yr, n);
    }
}

namespace {
std::uint64_t hashCombine(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}
} // namespace

std::uint64_t topologySignature(const BlockLduMatrix& A) {
    std::uint64_t h = hashCombine(0, static_cast<std::uint64_t>(A.nCells()));
    struct Face { int o, n; };
    std::vector<Face> faces;
    faces.reserve(A.nFaces());
    for (const InternalFace& f : A.mesh().faces()) faces.push_back({f.owner, f.neighbour});
    std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) {
        return a.o != b.o ? a.o < b.o : a.n < b.n;
    });
    for (const Face& f : faces) {
        h = hashCombine(h, static_cast<std::uint64_t>(f.o));
        h = hashCombine(h, static_cast<std::uint64_t>(f.n));
    }
    return h;
}

std::uint64_t topologySignature(const BlockCsrMatrix& A) {
    // Recover the face list (upper-triangular entries) from the pattern.
    std::uint64_t h = hashCombine(0, static_cast<std::uint64_t>(A.nRows));
    struct Face { int o, n; };
    std::vector<Face> faces;
    for (int r = 0; r < A.nRows; ++r)
        for (int k = A.rowOffsets[r]; k < A.rowOffsets[r + 1]; ++k)
            if (A.colIndices[k] > r) faces.push_back({r, A.colIndices[k]});
    // LDU face order is not recoverable from CSR; hash the sorted pattern.
    std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) {
        return a.o != b.o ? a.o < b.o : a.n < b.n;
    });
    for (const Face& f : faces) {
        h = hashCombine(h, static_cast<std::uint64_t>(f.o));
        h = hashCombine(h, static_cast<std::uint64_t>(f.n));
    }
    return h;
}

} // namespace fvb

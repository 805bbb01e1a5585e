"""Triangle location constructions with checkable correctness proofs."""

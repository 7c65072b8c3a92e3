# Pin BLAS to one thread before numpy loads anywhere: the determinism tests
# compare float32 results byte-for-byte across repeated runs.
import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import sys
from pathlib import Path

from hypothesis import settings

# Make the sibling oracles module importable regardless of invocation dir.
sys.path.insert(0, str(Path(__file__).parent))

# Property tests draw their instances deterministically so the suite is
# byte-stable run to run, matching the package's reproducibility contract.
settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")

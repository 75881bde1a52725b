import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from linkeval import Clustering, AttributeTable


@pytest.fixture
def canonical_truth() -> Clustering:
    """truth {{r1,r2,r3},{r4,r5}} from the worked 5-record example."""
    return Clustering.from_pairs(
        [("r1", "a"), ("r2", "a"), ("r3", "a"), ("r4", "b"), ("r5", "b")]
    )


@pytest.fixture
def canonical_prediction() -> Clustering:
    """prediction {{r1,r2},{r3,r4,r5}} from the worked 5-record example."""
    return Clustering.from_pairs(
        [("r1", "x"), ("r2", "x"), ("r3", "y"), ("r4", "y"), ("r5", "y")]
    )


@pytest.fixture
def canonical_attrs() -> AttributeTable:
    return AttributeTable.from_rows(
        [
            ("r1", "Lutgard De Jonghe", {"city": "Lafayette"}),
            ("r2", "L. C. De Jonghe", {"city": "Lafayette"}),
            ("r3", "Lutgard C. De Jonghe", {"city": "Berkeley"}),
            ("r4", "Stuart Lindsay", {"city": "Tempe"}),
            ("r5", "Stuart Lindsay", {"city": "Tempe"}),
        ]
    )

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from geo_fixtures import GEO_EXAMPLES  # noqa: E402
from subsaug import bundled_domain, build_tree, parse_program  # noqa: E402
from subsaug.engine import Corpus, CorpusExample  # noqa: E402


@pytest.fixture(scope="session")
def geo():
    return bundled_domain("geoquery")


@pytest.fixture(scope="session")
def scan():
    return bundled_domain("scan")


@pytest.fixture(scope="session")
def geo_trees():
    return {ex_id: (build_tree(spec), parse_program(prog)) for ex_id, spec, prog in GEO_EXAMPLES}


@pytest.fixture(scope="session")
def geo_corpus(geo_trees):
    return Corpus([CorpusExample(i, t.tokens, p, t) for i, (t, p) in geo_trees.items()])


@pytest.fixture(scope="session")
def worked_corpus(geo_trees):
    return Corpus([CorpusExample(i, geo_trees[i][0].tokens, geo_trees[i][1], geo_trees[i][0])
                   for i in ("geo-001", "geo-002")])

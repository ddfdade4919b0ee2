import pytest

from abtedit.langspec import LETLANG_DOCUMENT, editor_extend, load_spec


@pytest.fixture(scope="session")
def letlang():
    """The two-sort let/arithmetic language, editor-extended."""
    return editor_extend(load_spec(LETLANG_DOCUMENT))


@pytest.fixture(scope="session")
def letlang_plain():
    return load_spec(LETLANG_DOCUMENT)

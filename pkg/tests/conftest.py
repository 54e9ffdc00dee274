from __future__ import annotations

import pytest

from igtkit import IgtRecord, Split


@pytest.fixture
def make_record():
    """Record factory with sane defaults; override any field by keyword."""

    counter = {"n": 0}

    def factory(**overrides) -> IgtRecord:
        counter["n"] += 1
        fields = {
            "id": f"rec{counter['n']}",
            "transcription": "Žeda kidbeqor kurno lel yayrno .",
            "segmentation": "žeda-a kid-qor kur-n lel y-ayr-n",
            "glosses": "DEM1.IIPL.OBL-ERG girl-POSS.LAT throw-PFV.CVB wing II-lead-PST.UNW",
            "translation": "They threw the girl a wing and led her off.",
            "glottocode": "dido1241",
            "metalang_glottocode": "stan1293",
            "language_name": "Tsez",
            "source": "test-fixture",
            "split": Split.TRAIN,
        }
        fields.update(overrides)
        return IgtRecord(**fields)

    return factory


@pytest.fixture
def veraa_record(make_record):
    """The joint-format showcase example in Vera'a."""
    return make_record(
        id="veraa1",
        transcription="o wōlēn 'ēqēk",
        segmentation="o wōlē-0=n 'ēqē-k",
        glosses="INTERJ you.know-ZERO=ART garden-1SG",
        translation="Oh, over there is my garden",
        glottocode="vera1241",
        metalang_glottocode="English",
        language_name="Vera'a",
    )

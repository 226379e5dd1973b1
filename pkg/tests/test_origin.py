import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credfield.core import CanonicalOrigin, build_salt, canonical_origin
from credfield.errors import EmptyUserId, FieldTooLong, MalformedUrl, UnsupportedScheme


class TestCanonicalOrigin:
    def test_default_port_and_case_normalization(self):
        assert str(canonical_origin("https://Bank.Example:443/login?x=1")) == "https://bank.example"

    def test_non_default_port_retained(self):
        assert str(canonical_origin("http://intra.corp:8080/a")) == "http://intra.corp:8080"

    def test_http_default_port_elided(self):
        assert str(canonical_origin("http://x.example:80/")) == "http://x.example"

    def test_scheme_whitelist(self):
        with pytest.raises(UnsupportedScheme):
            canonical_origin("ftp://x")
        with pytest.raises(UnsupportedScheme):
            canonical_origin("javascript:alert(1)")

    def test_malformed(self):
        with pytest.raises(MalformedUrl):
            canonical_origin("not a url")
        with pytest.raises(MalformedUrl):
            canonical_origin("https://")
        with pytest.raises(MalformedUrl):
            canonical_origin("https://host:not-a-port/")

    def test_userinfo_path_query_fragment_discarded(self):
        origin = canonical_origin("https://user:pw@site.example:8443/p?q=1#f")
        assert str(origin) == "https://site.example:8443"

    def test_parse_serialize_idempotent(self):
        for url in ("https://a.example", "http://b.example:8080", "https://c.example:444"):
            origin = canonical_origin(url)
            assert canonical_origin(str(origin)) == origin

    hostnames = st.from_regex(r"[a-z][a-z0-9-]{0,20}(\.[a-z]{2,6}){1,2}", fullmatch=True)

    @settings(max_examples=100, deadline=None)
    @given(host=hostnames, scheme=st.sampled_from(["http", "https"]),
           port=st.one_of(st.none(), st.integers(min_value=1, max_value=65535)))
    def test_roundtrip_property(self, host, scheme, port):
        url = f"{scheme}://{host}" + (f":{port}" if port else "") + "/some/path"
        origin = canonical_origin(url)
        assert canonical_origin(str(origin)) == origin
        assert origin.host == host


class TestBuildSalt:
    def test_length_prefixing_breaks_concatenation_ambiguity(self):
        a = build_salt(canonical_origin("https://a"), "bc")
        b = build_salt(canonical_origin("https://ab"), "c")
        assert a != b

    def test_layout(self):
        salt = build_salt(canonical_origin("https://bank.example"), "alice")
        origin_bytes = b"https://bank.example"
        assert salt == (
            len(origin_bytes).to_bytes(2, "big") + origin_bytes
            + (5).to_bytes(2, "big") + b"alice"
        )
        assert salt[:2] == b"\x00\x14"

    def test_empty_user_rejected(self):
        with pytest.raises(EmptyUserId):
            build_salt(canonical_origin("https://x"), "")

    def test_too_long_rejected(self):
        with pytest.raises(FieldTooLong):
            build_salt(canonical_origin("https://x"), "u" * 65536)

    @settings(max_examples=200, deadline=None)
    @given(
        host1=TestCanonicalOrigin.hostnames, host2=TestCanonicalOrigin.hostnames,
        user1=st.text(min_size=1, max_size=30), user2=st.text(min_size=1, max_size=30),
    )
    def test_injective(self, host1, host2, user1, user2):
        o1 = CanonicalOrigin("https", host1)
        o2 = CanonicalOrigin("https", host2)
        if (o1, user1) != (o2, user2):
            assert build_salt(o1, user1) != build_salt(o2, user2)

"""
Tests for HTTP URL parsing, printing and relative resolution.
"""
import random

import pytest

from termweb.errors import MalformedUrl, NotHttp
from termweb.web.urls import UrlInfo, remove_dot_segments, url_info, url_info_relative, url_text

BASE = url_info("http://www.clip.dia.fi.upm.es/Software/termweb/manual.html")


class TestUrlInfo:
    def test_default_port(self):
        assert url_info("http://www.clip.dia.fi.upm.es/") == \
            UrlInfo(host="www.clip.dia.fi.upm.es", port=80, document="/")

    def test_explicit_port_and_document(self):
        info = url_info("http://www.clip.dia.fi.upm.es:8080/Software/termweb/manual.html")
        assert (info.host, info.port, info.document) == ("www.clip.dia.fi.upm.es", 8080,
                                                         "/Software/termweb/manual.html")

    def test_host_is_lowercased_and_empty_path_is_root(self):
        assert url_info("HTTP://WWW.Example.ORG") == UrlInfo(host="www.example.org", port=80, document="/")

    def test_query_kept_fragment_dropped(self):
        assert url_info("http://h/cgi-bin/q?name=daniel#top").document == "/cgi-bin/q?name=daniel"
        assert url_info("http://h?x=1").document == "/?x=1"

    def test_dot_segments(self):
        assert url_info("http://h/a/./b/../c").document == "/a/c"
        assert url_info("http://h/../../x").document == "/x"

    @pytest.mark.parametrize("url", ["mailto:clip@dia.fi.upm.es", "ftp://ftp.example.org/pub", "https://h/"])
    def test_other_schemes(self, url):
        with pytest.raises(NotHttp):
            url_info(url)

    @pytest.mark.parametrize("url", ["www.clip.dia.fi.upm.es/", "http:/x", "http://", "http://h:0/",
                                     "http://h:99999/", "http://h:8o/", "http://user@h/", "http://a b/"])
    def test_malformed(self, url):
        with pytest.raises(MalformedUrl):
            url_info(url)

    def test_text(self):
        assert url_text(UrlInfo(host="h", port=80, document="/x")) == "http://h/x"
        assert str(UrlInfo(host="h", port=8000, document="/")) == "http://h:8000/"


class TestScoobyExamples:
    def test_url_info(self):
        info = url_info("http://www.foo.com/bar/scooby.txt")
        assert (info.host, info.port, info.document) == ("www.foo.com", 80, "/bar/scooby.txt")

    def test_url_text_with_port(self):
        info = UrlInfo(host="www.foo.com", port=2000, document="/bar/scooby.txt")
        assert url_text(info) == "http://www.foo.com:2000/bar/scooby.txt"
        assert url_info("http://www.foo.com:2000/bar/scooby.txt") == info

    @pytest.mark.parametrize("ref,host,document", [
        ("/guu/intro.html", "www.foo.com", "/guu/intro.html"),
        ("dadu.html", "www.foo.com", "/bar/dadu.html"),
    ])
    def test_relative(self, ref, host, document):
        base = url_info("http://www.foo.com/bar/scoob.html")
        assert url_info_relative(ref, base) == UrlInfo(host=host, port=80, document=document)


class TestRelative:
    @pytest.mark.parametrize("ref,expected", [
        ("dadu.html", "http://www.clip.dia.fi.upm.es/Software/termweb/dadu.html"),
        ("../index.html", "http://www.clip.dia.fi.upm.es/Software/index.html"),
        ("/people/", "http://www.clip.dia.fi.upm.es/people/"),
        ("?q=1", "http://www.clip.dia.fi.upm.es/Software/termweb/manual.html?q=1"),
        ("#section", "http://www.clip.dia.fi.upm.es/Software/termweb/manual.html"),
        ("", "http://www.clip.dia.fi.upm.es/Software/termweb/manual.html"),
        ("//other.org/x", "http://other.org/x"),
        ("http://www.upm.es:81/a", "http://www.upm.es:81/a"),
        ("./", "http://www.clip.dia.fi.upm.es/Software/termweb/"),
        ("../../../../x", "http://www.clip.dia.fi.upm.es/x"),
    ])
    def test_resolution(self, ref, expected):
        assert url_text(url_info_relative(ref, BASE)) == expected

    def test_keeps_base_port(self):
        base = url_info("http://localhost:8080/a/b")
        assert url_info_relative("c", base) == UrlInfo(host="localhost", port=8080, document="/a/c")

    def test_absolute_other_scheme(self):
        with pytest.raises(NotHttp):
            url_info_relative("mailto:clip@dia.fi.upm.es", BASE)


@pytest.mark.parametrize("path,expected", [
    ("/", "/"), ("/a/b/..", "/a/"), ("/a/b/.", "/a/b/"), ("/a//b", "/a//b"), ("/..", "/"),
])
def test_remove_dot_segments(path, expected):
    assert remove_dot_segments(path) == expected


SEGMENT_CHARS = "abcxyz019-_~%"


def _random_url_info(rng):
    host = rng.choice(["localhost", "www.clip.dia.fi.upm.es", "h", "a-b.example.org", "10.0.0.1"])
    port = rng.choice([80, 8080, 1, 65535, rng.randint(1, 65535)])
    segments = ["s" + "".join(rng.choice(SEGMENT_CHARS) for _ in range(rng.randint(0, 5)))
                for _ in range(rng.randint(0, 4))]
    document = "/" + "/".join(segments)
    if segments and rng.random() < 0.3:
        document += "/"
    if rng.random() < 0.4:
        document += "?" + "".join(rng.choice(SEGMENT_CHARS + "=&/?") for _ in range(rng.randint(0, 8)))
    return UrlInfo(host=host, port=port, document=document)


@pytest.mark.parametrize("seed", range(10))
def test_text_round_trip(seed):
    rng = random.Random(seed)
    for _ in range(50):
        info = _random_url_info(rng)
        assert url_info(url_text(info)) == info

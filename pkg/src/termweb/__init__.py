"""
termweb

Web programming with markup as terms: documents are immutable term trees
rendered to and parsed from HTML/XML, forms are decoded from CGI requests,
documents are fetched over HTTP/1.0, and long-lived active modules answer
remote calls.
"""

__version__ = "0.1.0"

from termweb.errors import TermwebError
from termweb.markup import expand, parse, parse_template, render
from termweb.settings import Settings, get_settings
from termweb.web import fetch_url, get_form_input, url_info

__all__ = [
    '__version__',
    'Settings',
    'TermwebError',
    'expand',
    'fetch_url',
    'get_form_input',
    'get_settings',
    'parse',
    'parse_template',
    'render',
    'url_info',
]

from .episodes import MalformedEpisodeList, parse_episode_list, serialize_episode_list
from .fetch import Fetcher, FetchError, HttpError, NetworkError, RateLimiter
from .filters import consistency_filter, filter_redirects
from .timemap import MalformedTimeMap, TimeMapDocument, parse_timemap, serialize_timemap
from .wikiexport import (MalformedExport, WikiExportDocument, iter_wiki_export,
                         parse_wiki_export, serialize_wiki_export)

__all__ = [
    "MalformedEpisodeList", "parse_episode_list", "serialize_episode_list",
    "Fetcher", "FetchError", "HttpError", "NetworkError", "RateLimiter",
    "consistency_filter", "filter_redirects",
    "MalformedTimeMap", "TimeMapDocument", "parse_timemap", "serialize_timemap",
    "MalformedExport", "WikiExportDocument", "iter_wiki_export",
    "parse_wiki_export", "serialize_wiki_export",
]

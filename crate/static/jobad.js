// Interaction for rendered theory pages: definition lookup on symbol
// click, proof step folding, and related resources from the RDF graph.
(function () {
  "use strict";

  var popup = null;

  function short(iri) {
    var cut = Math.max(iri.lastIndexOf("#"), iri.lastIndexOf("/"));
    return cut >= 0 ? iri.slice(cut + 1) : iri;
  }

  function dismiss() {
    if (popup) popup.remove();
    popup = null;
  }

  function open(x, y, content) {
    dismiss();
    popup = document.createElement("div");
    popup.className = "popup";
    popup.style.left = x + "px";
    popup.style.top = y + "px";
    popup.appendChild(content);
    document.body.appendChild(popup);
    return popup;
  }

  function message(text) {
    var p = document.createElement("p");
    p.textContent = text;
    return p;
  }

  function baseUri() {
    return document.body.getAttribute("data-base") || "";
  }

  // Symbol URI of a presentation node, read from the content markup only.
  function symbolUri(node) {
    var math = node.closest("math");
    var content = math && math.querySelector('annotation-xml [xref="' + node.id + '"]');
    if (!content || content.localName !== "OMS") return null;
    return baseUri() + "/omdoc/" + content.getAttribute("cd") + "#" + content.getAttribute("name");
  }

  function lookupDefinition(uri, x, y) {
    var box = open(x, y, message("Loading " + short(uri) + "..."));
    var page = uri.split("#")[0];
    fetch(page, { headers: { Accept: "application/xhtml+xml" } })
      .then(function (r) {
        if (!r.ok) throw new Error(r.status);
        return r.text();
      })
      .then(function (text) {
        if (popup !== box) return;
        var doc = new DOMParser().parseFromString(text, "application/xhtml+xml");
        var found = document.createElement("div");
        var decl = doc.querySelector('[about="' + uri + '"]');
        if (decl) found.appendChild(document.importNode(decl, true));
        doc.querySelectorAll('[rel="o:defines"][href="' + uri + '"]').forEach(function (a) {
          var section = a.closest("section");
          if (section) found.appendChild(document.importNode(section, true));
        });
        open(x, y, found.childNodes.length ? found : message("no definition found"));
      })
      .catch(function () {
        if (popup === box) open(x, y, message("no definition found"));
      });
  }

  function showRelated(uri, x, y) {
    var box = open(x, y, message("Loading..."));
    fetch("/neighborhood?uri=" + encodeURIComponent(uri), { headers: { Accept: "application/json" } })
      .then(function (r) {
        if (r.status === 404) return { triples: [] };
        if (!r.ok) throw new Error("server error " + r.status);
        return r.json();
      })
      .then(function (data) {
        if (popup !== box) return;
        var groups = {};
        data.triples.forEach(function (t) {
          if (t.object.type !== "uri") return;
          var label, other;
          if (t.subject === uri) {
            label = short(t.predicate);
            other = t.object.value;
          } else if (t.object.value === uri) {
            label = short(t.predicate) + " by";
            other = t.subject;
          } else {
            return;
          }
          (groups[label] = groups[label] || []).push(other);
        });
        var labels = Object.keys(groups).sort();
        if (!labels.length) return open(x, y, message("no related resources"));
        var list = document.createElement("dl");
        labels.forEach(function (label) {
          var dt = document.createElement("dt");
          dt.textContent = label;
          list.appendChild(dt);
          groups[label].forEach(function (other) {
            var dd = document.createElement("dd");
            var a = document.createElement("a");
            a.href = other;
            a.textContent = short(other);
            dd.appendChild(a);
            list.appendChild(dd);
          });
        });
        open(x, y, list);
      })
      .catch(function (e) {
        if (popup === box) open(x, y, message(String(e.message || e)));
      });
  }

  function toggleFold(step) {
    step.classList.toggle("folded");
  }

  document.addEventListener("keydown", function (ev) {
    if (ev.key === "Escape") dismiss();
  });

  document.addEventListener("click", function (ev) {
    var target = ev.target;
    if (target.closest(".popup")) return;
    dismiss();
    var label = target.closest(".step-label");
    if (label) {
      toggleFold(label.closest(".step"));
      return;
    }
    var node = target.closest("math [id]");
    if (node) {
      var uri = symbolUri(node);
      if (uri) lookupDefinition(uri, ev.pageX, ev.pageY);
      return;
    }
    var resource = target.closest("[about][typeof]");
    if (resource && ev.altKey) {
      ev.preventDefault();
      showRelated(resource.getAttribute("about"), ev.pageX, ev.pageY);
    }
  });
})();

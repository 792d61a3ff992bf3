// Runtime shim bundle. GENO_CONFIG is prepended by `geno build`.
(function () {
  "use strict";
  var config = window.GENO_CONFIG || {};
  var serverUrl = config.serverUrl || "http://127.0.0.1:7311";
  var shortcut = config.shortcut || "Ctrl+`";
  var sessionId = null;
  var trace = [];
  var TRACE_LIMIT = 240;

  function say(text) {
    if (window.speechSynthesis && window.SpeechSynthesisUtterance) {
      window.speechSynthesis.speak(new SpeechSynthesisUtterance(text));
    }
    status(text);
  }

  var panel = document.createElement("div");
  var button = document.createElement("button");
  var input = document.createElement("input");
  function status(text) {
    panel.textContent = text;
  }

  function tagIndex(el) {
    var all = document.getElementsByTagName(el.tagName);
    for (var i = 0; i < all.length; i++) {
      if (all[i] === el) return i;
    }
    return -1;
  }

  function snapshot(el) {
    var r = el.getBoundingClientRect();
    var attributes = { innerText: (el.innerText || "").trim() };
    for (var i = 0; i < el.attributes.length; i++) {
      attributes[el.attributes[i].name] = el.attributes[i].value;
    }
    return {
      tag: el.tagName.toLowerCase(),
      classes: Array.prototype.slice.call(el.classList),
      attributes: attributes,
      boundingBox: { x: r.left, y: r.top, width: r.width, height: r.height }
    };
  }

  function record(kind, e) {
    var el = document.elementFromPoint(e.clientX, e.clientY);
    if (!el || el === button || el === panel || el === input) return;
    trace.push({ kind: kind, x: e.clientX, y: e.clientY, timestampMs: Date.now(), element: snapshot(el) });
    if (trace.length > TRACE_LIMIT) trace.shift();
  }
  document.addEventListener("pointermove", function (e) { record("move", e); }, true);
  document.addEventListener("pointerdown", function (e) { record("down", e); }, true);
  document.addEventListener("pointerup", function (e) { record("up", e); }, true);

  function post(path, body) {
    return fetch(serverUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body)
    }).then(function (r) { return r.json(); });
  }

  function resolveFunction(name) {
    if (typeof window[name] === "function") return window[name];
    throw new Error("function " + name + " is not defined");
  }

  function execute(plan) {
    if (plan.type === "InvokeFunction") {
      resolveFunction(plan.functionName).apply(null, plan.orderedArguments);
      status("Done: " + plan.functionName);
    } else if (plan.type === "ReplayDemonstration") {
      plan.directives.forEach(function (d) {
        var el = document.getElementsByTagName(d.selectByTagIndex.tag)[d.selectByTagIndex.index];
        if (!el) throw new Error("no " + d.selectByTagIndex.tag + " at index " + d.selectByTagIndex.index);
        if (d.then === "click") el.click();
        else { el.value = d.text; el.dispatchEvent(new Event("input", { bubbles: true })); }
      });
      status("Done");
    } else if (plan.type === "Speak") {
      say(plan.text);
    }
  }

  function handle(envelope) {
    if (envelope.error) {
      status(envelope.error.code + ": " + envelope.error.message);
      return;
    }
    var p = envelope.payload;
    sessionId = p.session.state === "filling" ? p.session.sessionId : null;
    if (p.prompt) say(p.prompt);
    if (p.plan) execute(p.plan);
  }

  function submit(utterance) {
    status("“" + utterance + "”");
    var request = sessionId
      ? post("/session/" + sessionId + "/answer", { utterance: utterance })
      : post("/parse", { utterance: utterance, trace: trace.slice() });
    request.then(handle, function (err) { status(String(err)); });
  }

  var Recognition = window.SpeechRecognition || window.webkitSpeechRecognition;
  function listen() {
    if (!Recognition) {
      input.style.display = "block";
      input.focus();
      return;
    }
    var rec = new Recognition();
    rec.lang = "en-US";
    rec.onresult = function (e) { submit(e.results[0][0].transcript); };
    rec.onend = function () { button.textContent = "🎤"; };
    button.textContent = "●";
    status("Listening…");
    rec.start();
  }

  function matchesShortcut(e) {
    var parts = shortcut.split("+");
    var key = parts.pop();
    return e.key === key &&
      e.ctrlKey === (parts.indexOf("Ctrl") >= 0) &&
      e.altKey === (parts.indexOf("Alt") >= 0) &&
      e.shiftKey === (parts.indexOf("Shift") >= 0);
  }

  function mount() {
    button.textContent = "🎤";
    button.style.cssText = "position:fixed;right:24px;bottom:24px;z-index:2147483647;border-radius:50%;width:48px;height:48px";
    panel.style.cssText = "position:fixed;right:24px;bottom:80px;z-index:2147483647;background:#fff;padding:4px 8px";
    input.style.cssText = "position:fixed;right:84px;bottom:32px;z-index:2147483647;display:none";
    input.placeholder = "Type a command";
    input.addEventListener("keydown", function (e) {
      if (e.key === "Enter" && input.value.trim()) {
        submit(input.value.trim());
        input.value = "";
      }
    });
    button.addEventListener("click", listen);
    document.addEventListener("keydown", function (e) {
      if (matchesShortcut(e)) { e.preventDefault(); listen(); }
    });
    document.body.appendChild(panel);
    document.body.appendChild(input);
    document.body.appendChild(button);
  }

  window.geno = { say: say, submit: submit };
  if (document.readyState === "loading") document.addEventListener("DOMContentLoaded", mount);
  else mount();
})();

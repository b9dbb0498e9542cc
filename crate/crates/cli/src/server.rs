//! Minimal read-only HTTP server for public newsletter links.
//!
//! Serves exactly two routes: `GET /healthz` and `GET /n/<public_token>`.
//! Tokens are checked against the strict token grammar before any
//! filesystem access, so path traversal never reaches the disk.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::time::Duration;

use vjournal::newsletter::is_public_token;

pub struct NewsletterServer {
    listener: TcpListener,
    out_dir: PathBuf,
}

impl NewsletterServer {
    /// Bind the listen address. Bind failure is fatal at startup.
    pub fn bind(addr: &str, out_dir: impl AsRef<Path>) -> std::io::Result<NewsletterServer> {
        let listener = TcpListener::bind(addr)?;
        Ok(NewsletterServer { listener, out_dir: out_dir.as_ref().to_path_buf() })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serve forever, one thread per connection. The server never mutates
    /// state; it only reads files from the output directory.
    pub fn run(self) -> std::io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(_) => continue,
            };
            let out_dir = self.out_dir.clone();
            std::thread::spawn(move || {
                let _ = handle_connection(stream, &out_dir);
            });
        }
        Ok(())
    }
}

fn respond(stream: &mut TcpStream, status: &str, content_type: &str, body: &[u8]) -> std::io::Result<()> {
    let header = format!(
        "HTTP/1.1 {status}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    stream.write_all(header.as_bytes())?;
    stream.write_all(body)?;
    stream.flush()
}

fn handle_connection(mut stream: TcpStream, out_dir: &Path) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    // drain headers
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" || line == "\n" {
            break;
        }
    }

    let mut parts = request_line.split_whitespace();
    let (method, path) = match (parts.next(), parts.next()) {
        (Some(m), Some(p)) => (m, p),
        _ => return respond(&mut stream, "400 Bad Request", "text/plain", b"bad request"),
    };
    if method != "GET" {
        return respond(&mut stream, "405 Method Not Allowed", "text/plain", b"method not allowed");
    }

    if path == "/healthz" {
        return respond(&mut stream, "200 OK", "text/plain", b"ok");
    }
    if let Some(token) = path.strip_prefix("/n/") {
        if is_public_token(token) {
            let file = out_dir.join(format!("{token}.html"));
            if let Ok(mut f) = std::fs::File::open(file) {
                let mut body = Vec::new();
                f.read_to_end(&mut body)?;
                return respond(&mut stream, "200 OK", "text/html; charset=utf-8", &body);
            }
        }
        return respond(&mut stream, "404 Not Found", "text/plain", b"not found");
    }
    respond(&mut stream, "404 Not Found", "text/plain", b"not found")
}
